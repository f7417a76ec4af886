//! Radial solutions of the symmetric minimal surface equation.
//!
//! Radial profiles obey `u'' / (1 + u'^2) + (n-1) u' / r = (m-1) / u`. For
//! `n = 1` the profile launched from `u(0) = 1, u'(0) = 0` conserves
//! `u^{1-m} sqrt(1 + u'^2)` and is strictly convex; for `m = 2` it is
//! `cosh`. For `n >= 2` there is an exterior profile `psi` on `r >= 1` with
//! `psi(1+) = 0` and a vertical launch `psi'(1+) = +inf`, asymptotic to the
//! cone line `sqrt((m-1)/(n-1)) r`. Near the launch the integration runs in
//! the swapped parametrization `r(u)` (the slope `dr/du` vanishes there),
//! switching to `r` as the independent variable once the slope `u'` drops
//! to a configured threshold.

use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    ByRadius,
    /// Integrated in the height variable near the vertical launch, then by radius.
    ByHeightNearLaunch,
}

#[derive(Debug, Clone)]
pub struct ProfileMeta {
    /// (r, u) of the launch point.
    pub launch: (f64, f64),
    /// Base integration step (height step near a vertical launch).
    pub step: f64,
    /// Where integration stopped because the slope cap was hit (the
    /// numerical surrogate for the end of the maximal interval), if it was.
    pub stop_x: Option<f64>,
    /// Max height discrepancy against a half-step re-integration.
    pub halving_error: Option<f64>,
    /// Radius at which the exterior integration switched from height to
    /// radius parametrization.
    pub switch_radius: Option<f64>,
}

/// Tabulated radial solution `(r_i, u_i, u'(r_i))`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub parametrization: Parametrization,
    pub params: Params,
    pub meta: ProfileMeta,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Strictly increasing radii, nonnegative heights.
    pub fn validate(&self) -> Result<()> {
        if self.r.len() != self.u.len() || self.r.len() != self.du.len() {
            return Err(Error::Structural("ragged profile columns".into()));
        }
        for w in self.r.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Structural(format!(
                    "radii not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for (idx, &u) in self.u.iter().enumerate() {
            if !(u >= 0.0) || !u.is_finite() {
                return Err(Error::Structural(format!("bad height {u} at sample {idx}")));
            }
        }
        Ok(())
    }

    /// Linear interpolation of the height at radius `r`, extended by the
    /// end slopes outside the tabulated range.
    pub fn height_at(&self, r: f64) -> f64 {
        let n = self.r.len();
        if n == 0 {
            return 0.0;
        }
        if r <= self.r[0] {
            let s = finite_or(self.du[0], 0.0);
            return self.u[0] + s * (r - self.r[0]);
        }
        if r >= self.r[n - 1] {
            let s = finite_or(self.du[n - 1], 0.0);
            return self.u[n - 1] + s * (r - self.r[n - 1]);
        }
        let idx = self.r.partition_point(|&x| x < r);
        let (r0, r1) = (self.r[idx - 1], self.r[idx]);
        let t = (r - r0) / (r1 - r0);
        self.u[idx - 1] * (1.0 - t) + self.u[idx] * t
    }
}

fn finite_or(x: f64, fallback: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        fallback
    }
}

/// Residual of the radial equation at each sample (endpoints are NaN),
/// computed from nonuniform three-point differences of the tabulated
/// heights. For `n = 1` the `(n-1) u'/r` term drops and radii may be
/// nonpositive (they are the line coordinate).
pub fn radial_residual(prof: &RadialProfile) -> Result<Vec<f64>> {
    if prof.len() < 3 {
        return Err(Error::Structural(format!(
            "need at least 3 samples for a residual, got {}",
            prof.len()
        )));
    }
    prof.validate()?;
    let n_f = prof.params.n_f();
    let m1 = prof.params.m_f() - 1.0;
    let mut out = vec![f64::NAN; prof.len()];
    for i in 1..prof.len() - 1 {
        let (rm, r0, rp) = (prof.r[i - 1], prof.r[i], prof.r[i + 1]);
        let (um, u0, up) = (prof.u[i - 1], prof.u[i], prof.u[i + 1]);
        if u0 <= 0.0 {
            return Err(Error::Precondition(format!(
                "radial residual needs u > 0, got {u0} at sample {i}"
            )));
        }
        if prof.params.n >= 2 && r0 <= 0.0 {
            return Err(Error::Precondition(format!(
                "radial residual needs r > 0 for n >= 2, got {r0} at sample {i}"
            )));
        }
        let a = r0 - rm;
        let b = rp - r0;
        let d1 = (-b / (a * (a + b))) * um + ((b - a) / (a * b)) * u0 + (a / (b * (a + b))) * up;
        let d2 = 2.0 * (um / (a * (a + b)) - u0 / (a * b) + up / (b * (a + b)));
        let radial_term = if prof.params.n >= 2 {
            (n_f - 1.0) * d1 / r0
        } else {
            0.0
        };
        out[i] = d2 / (1.0 + d1 * d1) + radial_term - m1 / u0;
    }
    Ok(out)
}

/// Right side of the `n = 1` system `u' = s, s' = (m-1)(1 + s^2)/u`.
fn n1_rhs(m1: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], m1 * (1.0 + y[1] * y[1]) / y[0]]
}

fn rk4_step<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, y: [f64; 2], h: f64) -> [f64; 2] {
    let k1 = f(y);
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Slope magnitude beyond which the `n = 1` integration stops and records
/// the stopping coordinate as the numerical end of the maximal interval.
pub const N1_SLOPE_CAP: f64 = 1e6;

/// Integrate the `n = 1` profile from `u(0) = 1, u'(0) = 0` out to `x_max`
/// (negative `x_max` integrates leftward) with classical fourth-order steps.
pub fn integrate_n1(p: &Params, x_max: f64, step: f64) -> Result<RadialProfile> {
    if p.n != 1 {
        return Err(Error::BadParams(format!(
            "integrate_n1 requires n = 1, got n = {}",
            p.n
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Integration(format!("bad step {step}")));
    }
    if x_max == 0.0 {
        return Err(Error::Integration("x_max must be nonzero".into()));
    }
    let (xs, us, ss, stop) = n1_run(p.m_f() - 1.0, x_max, step)?;
    // halving-based error estimate against a half-step run (the runs may
    // stop at different lengths when the slope cap cuts them short)
    let (_, us2, _, _) = n1_run(p.m_f() - 1.0, x_max, step / 2.0)?;
    let n_cmp = us.len().min((us2.len() + 1) / 2);
    let halving_error = us[..n_cmp]
        .iter()
        .enumerate()
        .map(|(i, &u)| (u - us2[2 * i]).abs())
        .fold(0.0_f64, f64::max);

    let mut prof = RadialProfile {
        r: xs,
        u: us,
        du: ss,
        parametrization: Parametrization::ByRadius,
        params: *p,
        meta: ProfileMeta {
            launch: (0.0, 1.0),
            step,
            stop_x: stop,
            halving_error: Some(halving_error),
            switch_radius: None,
        },
    };
    if x_max < 0.0 {
        prof.r.reverse();
        prof.u.reverse();
        prof.du.reverse();
    }
    prof.validate()?;
    Ok(prof)
}

#[allow(clippy::type_complexity)]
fn n1_run(
    m1: f64,
    x_max: f64,
    step: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Option<f64>)> {
    let dir = x_max.signum();
    let h = dir * step;
    let n_steps = (x_max.abs() / step).ceil() as usize;
    let mut y = [1.0, 0.0];
    let mut xs = vec![0.0];
    let mut us = vec![1.0];
    let mut ss = vec![0.0];
    let mut stop = None;
    for k in 1..=n_steps {
        y = rk4_step(&|y| n1_rhs(m1, y), y, h);
        let x = k as f64 * h;
        if !y[0].is_finite() || !y[1].is_finite() || y[0] <= 0.0 {
            return Err(Error::Integration(format!(
                "profile blew up at x = {x} (u = {}, u' = {})",
                y[0], y[1]
            )));
        }
        xs.push(x);
        us.push(y[0]);
        ss.push(y[1]);
        if y[1].abs() > N1_SLOPE_CAP {
            stop = Some(x);
            break;
        }
    }
    Ok((xs, us, ss, stop))
}

/// Step control for [`integrate_exterior`].
#[derive(Debug, Clone, Copy)]
pub struct ExteriorStepControl {
    /// Height at which the swapped-parametrization series expansion is
    /// evaluated to start the integration.
    pub u_start: f64,
    /// Height step while the profile is steeper than `slope_switch`.
    pub u_step: f64,
    /// Radius step after the switch.
    pub r_step: f64,
    /// Slope threshold for switching from height to radius parametrization.
    pub slope_switch: f64,
}

impl Default for ExteriorStepControl {
    fn default() -> Self {
        ExteriorStepControl {
            u_start: 1e-8,
            u_step: 1e-3,
            r_step: 1e-3,
            slope_switch: 10.0,
        }
    }
}

/// Integrate the exterior profile `psi` on `[1, r_max]`: vertical launch at
/// `r = 1`, monotone increasing, asymptotic in slope to the cone.
///
/// The first stored sample is the launch point `(1, 0)` with infinite slope.
pub fn integrate_exterior(
    p: &Params,
    r_max: f64,
    ctrl: ExteriorStepControl,
) -> Result<RadialProfile> {
    if p.n < 2 {
        return Err(Error::BadParams(format!(
            "exterior profile requires n >= 2, got n = {}",
            p.n
        )));
    }
    if !(r_max > 1.0) {
        return Err(Error::BadParams(format!("r_max must exceed 1, got {r_max}")));
    }
    if !(ctrl.u_step > 0.0) || ctrl.u_step < 1e-14 || !(ctrl.r_step > 0.0) {
        return Err(Error::Integration(format!(
            "step underflow near the vertical launch: u_step = {}, r_step = {}",
            ctrl.u_step, ctrl.r_step
        )));
    }
    let n1 = p.n_f() - 1.0;
    let m1 = p.m_f() - 1.0;
    let m = p.m_f();

    let mut r_col = vec![1.0];
    let mut u_col = vec![0.0];
    let mut s_col = vec![f64::INFINITY];

    // launch series for the swapped parametrization r(u):
    // r = 1 + a2 u^2 + a4 u^4, with the grazing behavior psi ~ sqrt(2m/(n-1)) sqrt(r-1)
    let a2 = n1 / (2.0 * m);
    let a4 = a2 * (8.0 * a2 * a2 - n1) / (4.0 * (m + 2.0));
    let mut u = ctrl.u_start;
    let mut y = [
        1.0 + a2 * u * u + a4 * u.powi(4),
        2.0 * a2 * u + 4.0 * a4 * u.powi(3),
    ];

    // phase 1: r as a function of u while the slope exceeds the threshold
    let q_rhs = |u: f64, y: [f64; 2]| -> [f64; 2] {
        [y[1], (1.0 + y[1] * y[1]) * (n1 / y[0] - m1 * y[1] / u)]
    };
    let q_switch = 1.0 / ctrl.slope_switch;
    let mut guard = 0usize;
    while y[1] < q_switch {
        // one RK4 step in u (the rhs depends on u, so track stage abscissae)
        let h = ctrl.u_step;
        let k1 = q_rhs(u, y);
        let k2 = q_rhs(
            u + 0.5 * h,
            [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]],
        );
        let k3 = q_rhs(
            u + 0.5 * h,
            [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]],
        );
        let k4 = q_rhs(u + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        u += h;
        if !y[0].is_finite() || !y[1].is_finite() || y[1] <= 0.0 {
            return Err(Error::Integration(format!(
                "height parametrization failed at u = {u}: r = {}, dr/du = {}",
                y[0], y[1]
            )));
        }
        if y[0] > *r_col.last().unwrap() {
            r_col.push(y[0]);
            u_col.push(u);
            s_col.push(1.0 / y[1]);
        }
        guard += 1;
        if guard > 10_000_000 {
            return Err(Error::Integration(
                "height parametrization did not reach the slope threshold".into(),
            ));
        }
    }
    let switch_radius = y[0];

    // phase 2: u as a function of r out to r_max
    let mut r = y[0];
    let mut z = [u, 1.0 / y[1]];
    let r_rhs = |r: f64, z: [f64; 2]| -> [f64; 2] {
        [z[1], (1.0 + z[1] * z[1]) * (m1 / z[0] - n1 * z[1] / r)]
    };
    while r < r_max {
        let h = ctrl.r_step.min(r_max - r);
        let k1 = r_rhs(r, z);
        let k2 = r_rhs(
            r + 0.5 * h,
            [z[0] + 0.5 * h * k1[0], z[1] + 0.5 * h * k1[1]],
        );
        let k3 = r_rhs(
            r + 0.5 * h,
            [z[0] + 0.5 * h * k2[0], z[1] + 0.5 * h * k2[1]],
        );
        let k4 = r_rhs(r + h, [z[0] + h * k3[0], z[1] + h * k3[1]]);
        z = [
            z[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            z[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        r += h;
        if !z[0].is_finite() || !z[1].is_finite() || z[0] <= 0.0 {
            return Err(Error::Integration(format!(
                "radius parametrization failed at r = {r}"
            )));
        }
        r_col.push(r);
        u_col.push(z[0]);
        s_col.push(z[1]);
    }

    let prof = RadialProfile {
        r: r_col,
        u: u_col,
        du: s_col,
        parametrization: Parametrization::ByHeightNearLaunch,
        params: *p,
        meta: ProfileMeta {
            launch: (1.0, 0.0),
            step: ctrl.u_step,
            stop_x: None,
            halving_error: None,
            switch_radius: Some(switch_radius),
        },
    };
    prof.validate()?;
    // the equation forces u' > 0 after the vertical launch
    for w in prof.u.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Integration(format!(
                "exterior profile lost monotonicity ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(prof)
}

/// Geometric rescaling `psi_lambda(r) = lambda psi(r / lambda)`: radii and
/// heights scale, slopes are unchanged.
pub fn scale_profile(prof: &RadialProfile, lambda: f64) -> RadialProfile {
    assert!(lambda > 0.0, "scale factor must be positive");
    RadialProfile {
        r: prof.r.iter().map(|&r| lambda * r).collect(),
        u: prof.u.iter().map(|&u| lambda * u).collect(),
        du: prof.du.clone(),
        parametrization: prof.parametrization,
        params: prof.params,
        meta: ProfileMeta {
            launch: (prof.meta.launch.0 * lambda, prof.meta.launch.1 * lambda),
            step: prof.meta.step,
            stop_x: prof.meta.stop_x.map(|x| lambda * x),
            halving_error: prof.meta.halving_error.map(|e| lambda * e),
            switch_radius: prof.meta.switch_radius.map(|r| lambda * r),
        },
    }
}

/// Result of the slope-supremum extraction `beta = sup psi(r)/r`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeSup {
    pub beta: f64,
    /// True when the argmax is the last sample, i.e. the supremum may not
    /// have been captured yet.
    pub at_final_sample: bool,
}

/// Max over samples of `u_i / r_i` (samples at nonpositive radius are skipped).
pub fn slope_sup(prof: &RadialProfile) -> Result<SlopeSup> {
    if prof.is_empty() {
        return Err(Error::Structural("slope_sup of an empty profile".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for i in 0..prof.len() {
        if prof.r[i] <= 0.0 {
            continue;
        }
        let ratio = prof.u[i] / prof.r[i];
        if ratio > best {
            best = ratio;
            best_idx = i;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Structural(
            "slope_sup: no samples at positive radius".into(),
        ));
    }
    Ok(SlopeSup {
        beta: best,
        at_final_sample: best_idx + 1 == prof.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_matches_cosh() {
        let p = Params::new(2, 1).unwrap();
        let prof = integrate_n1(&p, 2.0, 1e-3).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..prof.len() {
            err = err.max((prof.u[i] - prof.r[i].cosh()).abs());
        }
        assert!(err < 1e-6, "cosh error {err}");
        assert!(prof.meta.halving_error.unwrap() < 1e-9);
    }

    #[test]
    fn n1_conserved_quantity() {
        // u^{1-m} sqrt(1 + u'^2) stays at its launch value 1; measure the
        // drift away from the near-vertical end where the fixed step loses
        // resolution
        for m in [2u32, 3, 5] {
            let p = Params::new(m, 1).unwrap();
            let prof = integrate_n1(&p, 1.5, 1e-3).unwrap();
            let mut drift: f64 = 0.0;
            for i in 0..prof.len() {
                if prof.du[i].abs() > 20.0 {
                    continue;
                }
                let c = prof.u[i].powf(1.0 - m as f64) * (1.0 + prof.du[i] * prof.du[i]).sqrt();
                drift = drift.max((c - 1.0).abs());
            }
            assert!(drift < 1e-8, "m = {m}: conserved drift {drift}");
        }
    }

    #[test]
    fn n1_mirror_symmetry() {
        let p = Params::new(3, 1).unwrap();
        let fwd = integrate_n1(&p, 1.0, 1e-3).unwrap();
        let bwd = integrate_n1(&p, -1.0, 1e-3).unwrap();
        // u(x) = u(-x)
        for i in 0..fwd.len() {
            let j = bwd.len() - 1 - i;
            assert!((fwd.r[i] + bwd.r[j]).abs() < 1e-12);
            assert!((fwd.u[i] - bwd.u[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn n1_strictly_convex() {
        let p = Params::new(2, 1).unwrap();
        let prof = integrate_n1(&p, 2.0, 1e-3).unwrap();
        for i in 1..prof.len() - 1 {
            let second = prof.u[i + 1] - 2.0 * prof.u[i] + prof.u[i - 1];
            assert!(second > 0.0, "second difference not positive at {i}");
        }
    }

    #[test]
    fn n1_residual_vanishes_on_cosh() {
        let p = Params::new(2, 1).unwrap();
        let prof = integrate_n1(&p, 2.0, 1e-3).unwrap();
        let res = radial_residual(&prof).unwrap();
        let max = res[1..res.len() - 1]
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b.abs()));
        assert!(max < 1e-4, "cosh residual {max}");
    }

    #[test]
    fn cone_residual_refines() {
        let p = Params::new(2, 2).unwrap();
        let a = p.cone_slope();
        let mut errs = Vec::new();
        for n_samples in [100usize, 200] {
            let r: Vec<f64> = (0..=n_samples)
                .map(|i| 0.2 + 0.8 * i as f64 / n_samples as f64)
                .collect();
            let u: Vec<f64> = r.iter().map(|&r| a * r).collect();
            let du = vec![a; r.len()];
            let prof = RadialProfile {
                r,
                u,
                du,
                parametrization: Parametrization::ByRadius,
                params: p,
                meta: ProfileMeta {
                    launch: (0.2, 0.2),
                    step: 0.0,
                    stop_x: None,
                    halving_error: None,
                    switch_radius: None,
                },
            };
            let res = radial_residual(&prof).unwrap();
            errs.push(
                res[1..res.len() - 1]
                    .iter()
                    .fold(0.0_f64, |acc, &v| acc.max(v.abs())),
            );
        }
        // the cone solves the equation exactly; differences on the exact
        // line are exact, so the residual is already at rounding level
        assert!(errs[1] < 1e-9, "cone residual {errs:?}");
    }

    #[test]
    fn constant_profile_residual() {
        let p = Params::new(3, 2).unwrap();
        let c = 0.7;
        let r: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.01).collect();
        let prof = RadialProfile {
            u: vec![c; r.len()],
            du: vec![0.0; r.len()],
            r,
            parametrization: Parametrization::ByRadius,
            params: p,
            meta: ProfileMeta {
                launch: (1.0, c),
                step: 0.01,
                stop_x: None,
                halving_error: None,
                switch_radius: None,
            },
        };
        let res = radial_residual(&prof).unwrap();
        for v in &res[1..res.len() - 1] {
            assert!((v + (p.m_f() - 1.0) / c).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples() {
        let p = Params::new(2, 2).unwrap();
        let prof = RadialProfile {
            r: vec![1.0, 2.0],
            u: vec![1.0, 2.0],
            du: vec![1.0, 1.0],
            parametrization: Parametrization::ByRadius,
            params: p,
            meta: ProfileMeta {
                launch: (1.0, 1.0),
                step: 1.0,
                stop_x: None,
                halving_error: None,
                switch_radius: None,
            },
        };
        assert!(matches!(radial_residual(&prof), Err(Error::Structural(_))));
    }

    #[test]
    fn exterior_launch_and_monotonicity() {
        let p = Params::new(2, 2).unwrap();
        let prof = integrate_exterior(&p, 5.0, ExteriorStepControl::default()).unwrap();
        assert!(prof.u[0].abs() < 1e-8, "launch height {}", prof.u[0]);
        assert!((prof.r[0] - 1.0).abs() < 1e-12);
        assert!(prof.du[0].is_infinite());
        for w in prof.u.windows(2) {
            assert!(w[1] > w[0]);
        }
        // residual of the integrated profile away from the launch
        let res = radial_residual(&prof).unwrap();
        let tail = &res[prof.len() / 2..prof.len() - 1];
        let max = tail.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        assert!(max < 1e-3, "exterior residual {max}");
    }

    #[test]
    fn exterior_approaches_cone_slope() {
        let p = Params::new(2, 2).unwrap();
        let prof = integrate_exterior(&p, 30.0, ExteriorStepControl::default()).unwrap();
        let last = prof.len() - 1;
        let ratio = prof.u[last] / prof.r[last];
        assert!(
            (ratio - p.cone_slope()).abs() < 0.05,
            "psi(30)/30 = {ratio}"
        );
    }

    #[test]
    fn scaling_and_slope_sup() {
        let p = Params::new(2, 2).unwrap();
        let prof = integrate_exterior(&p, 10.0, ExteriorStepControl::default()).unwrap();
        let s1 = slope_sup(&prof).unwrap();
        // identity at lambda = 1
        let same = scale_profile(&prof, 1.0);
        assert_eq!(same.r, prof.r);
        // beta is invariant under rescaling, exactly
        for lam in [0.5, 2.0, 7.3] {
            let scaled = scale_profile(&prof, lam);
            let s2 = slope_sup(&scaled).unwrap();
            assert_eq!(s1.beta, s2.beta);
        }
        // sample mapping (r, u) -> (lambda r, lambda u), slopes unchanged
        let scaled = scale_profile(&prof, 2.0);
        let mid = prof.len() / 2;
        assert_eq!(scaled.r[mid], 2.0 * prof.r[mid]);
        assert_eq!(scaled.u[mid], 2.0 * prof.u[mid]);
        assert_eq!(scaled.du[mid], prof.du[mid]);
        // beta is at least the cone slope up to sampling tolerance
        assert!(s1.beta > p.cone_slope() - 0.05);
    }

    #[test]
    fn cone_profile_beta_exact() {
        let p = Params::new(2, 2).unwrap();
        let a = p.cone_slope();
        let r: Vec<f64> = (1..100).map(|i| i as f64 * 0.1).collect();
        let prof = RadialProfile {
            u: r.iter().map(|&r| a * r).collect(),
            du: vec![a; r.len()],
            r,
            parametrization: Parametrization::ByRadius,
            params: p,
            meta: ProfileMeta {
                launch: (0.1, a * 0.1),
                step: 0.1,
                stop_x: None,
                halving_error: None,
                switch_radius: None,
            },
        };
        let s = slope_sup(&prof).unwrap();
        assert_eq!(s.beta, a);
    }

    #[test]
    fn scaling_commutes_with_residual() {
        // residual of psi_lambda at lambda r equals residual of psi at r,
        // scaled by 1/lambda
        let p = Params::new(3, 2).unwrap();
        let prof = integrate_exterior(&p, 5.0, ExteriorStepControl::default()).unwrap();
        let lam = 2.0;
        let scaled = scale_profile(&prof, lam);
        let res = radial_residual(&prof).unwrap();
        let res_s = radial_residual(&scaled).unwrap();
        for i in (prof.len() / 2)..prof.len() - 1 {
            assert!(
                (res_s[i] - res[i] / lam).abs() < 1e-9,
                "sample {i}: {} vs {}",
                res_s[i],
                res[i] / lam
            );
        }
    }
}
