//! Differential operators, the area functional, and graph geometry.
//!
//! The mean curvature operator `M(u) = sum_i D_i(D_i u / sqrt(1+|Du|^2))` is
//! discretized in divergence form: fluxes on half-nodes, differenced across
//! each interior node. The equation residual is `M(u) - (m-1)/(u v)` with
//! `v = sqrt(1+|Du|^2)`.
//!
//! The area functional `A(u) = sigma_{m-1} int sqrt(1+|Du|^2) u^{m-1} dx` is
//! quadratured with the per-cell midpoint rule: the cell gradient is the
//! average of the four edge differences and the height is the corner mean.
//! `area_gradient` differentiates that discrete sum exactly, so a finite
//! difference of `area_functional` reproduces it to rounding error.

use crate::error::{Error, Result};
use crate::field::{GraphGeometry, ScalarField, VectorField};
use crate::grid::NodeClass;
use crate::params::Params;

// direction indices into grid::DIRS
const E: usize = 0;
const W: usize = 1;
const N: usize = 2;
const S: usize = 3;

/// Gradient by central differences at interior nodes, falling back to
/// one-sided second-order (then first-order) stencils where the lattice
/// neighbors needed are inactive.
pub fn gradient(u: &ScalarField) -> Result<VectorField> {
    u.validate(false)?;
    let g = u.grid().clone();
    let mut out = VectorField::zeros(&g);
    let h = g.h;
    let active = |k: Option<usize>| k.filter(|&k| g.is_active(k));
    for k in 0..g.num_nodes() {
        if !g.is_active(k) {
            continue;
        }
        for (axis, dp, dm) in [(0usize, E, W), (1usize, N, S)] {
            let p1 = active(g.neighbor(k, dp));
            let m1 = active(g.neighbor(k, dm));
            let p2 = p1.and_then(|kk| active(g.neighbor(kk, dp)));
            let m2 = m1.and_then(|kk| active(g.neighbor(kk, dm)));
            let d = match (p1, m1) {
                (Some(p), Some(m)) => (u.value(p) - u.value(m)) / (2.0 * h),
                (Some(p), None) => match p2 {
                    Some(pp) => {
                        (-3.0 * u.value(k) + 4.0 * u.value(p) - u.value(pp)) / (2.0 * h)
                    }
                    None => (u.value(p) - u.value(k)) / h,
                },
                (None, Some(m)) => match m2 {
                    Some(mm) => {
                        (3.0 * u.value(k) - 4.0 * u.value(m) + u.value(mm)) / (2.0 * h)
                    }
                    None => (u.value(k) - u.value(m)) / h,
                },
                (None, None) => 0.0,
            };
            if axis == 0 {
                out.x[k] = d;
            } else {
                out.y[k] = d;
            }
        }
    }
    Ok(out)
}

/// Half-node flux in one axis direction: `d / sqrt(1 + d^2 + t^2)` where `d`
/// is the edge difference and `t` the averaged transverse slope.
#[inline]
fn half_flux(d: f64, t: f64) -> f64 {
    d / (1.0 + d * d + t * t).sqrt()
}

/// Divergence-form mean curvature operator at interior nodes.
pub fn mean_curvature_operator(u: &ScalarField) -> Result<ScalarField> {
    u.validate(false)?;
    let g = u.grid().clone();
    let mut out = ScalarField::zeros(&g);
    let h = g.h;
    let nx = g.nx();
    let uv = u.values();
    for &k in g.interior_nodes() {
        // full one-ring is active by the grid invariant
        let (e, w, n, s) = (k + 1, k - 1, k + nx, k - nx);
        let (ne, nw, se, sw) = (k + nx + 1, k + nx - 1, k - nx + 1, k - nx - 1);
        let fx_p = half_flux(
            (uv[e] - uv[k]) / h,
            (uv[n] - uv[s] + uv[ne] - uv[se]) / (4.0 * h),
        );
        let fx_m = half_flux(
            (uv[k] - uv[w]) / h,
            (uv[n] - uv[s] + uv[nw] - uv[sw]) / (4.0 * h),
        );
        let fy_p = half_flux(
            (uv[n] - uv[k]) / h,
            (uv[e] - uv[w] + uv[ne] - uv[nw]) / (4.0 * h),
        );
        let fy_m = half_flux(
            (uv[k] - uv[s]) / h,
            (uv[e] - uv[w] + uv[se] - uv[sw]) / (4.0 * h),
        );
        out.set(k, (fx_p - fx_m + fy_p - fy_m) / h);
    }
    Ok(out)
}

/// Residual `M(u) - (m-1)/(u sqrt(1+|Du|^2))` at interior nodes.
///
/// Errors if `u <= 0` at any interior node; the solver uses its floored
/// right-hand side instead of this operator while iterating.
pub fn sme_residual(u: &ScalarField, p: &Params) -> Result<ScalarField> {
    let g = u.grid().clone();
    for &k in g.interior_nodes() {
        if u.value(k) <= 0.0 {
            let (i, j) = g.ij(k);
            return Err(Error::NonPositive {
                what: "sme_residual",
                value: u.value(k),
                i,
                j,
            });
        }
    }
    let mut out = mean_curvature_operator(u)?;
    let grad = gradient(u)?;
    let m1 = p.m_f() - 1.0;
    for &k in g.interior_nodes() {
        let v = (1.0 + grad.x[k] * grad.x[k] + grad.y[k] * grad.y[k]).sqrt();
        out.set(k, out.value(k) - m1 / (u.value(k) * v));
    }
    Ok(out)
}

/// Per-cell midpoint quadrature data: cell gradient, corner mean, area weight.
struct CellQuad {
    gx: f64,
    gy: f64,
    mean: f64,
    corners: [usize; 4],
}

fn cell_quads<'a>(
    u: &'a ScalarField,
) -> impl Iterator<Item = CellQuad> + 'a {
    let g = u.grid();
    let nx = g.nx();
    let h = g.h;
    g.cells().iter().map(move |&k| {
        let corners = [k, k + 1, k + nx, k + nx + 1]; // sw, se, nw, ne
        let [sw, se, nw, ne] = corners.map(|c| u.value(c));
        CellQuad {
            gx: (se + ne - sw - nw) / (2.0 * h),
            gy: (nw + ne - sw - se) / (2.0 * h),
            mean: 0.25 * (sw + se + nw + ne),
            corners,
        }
    })
}

/// Discrete area functional `sigma_{m-1} int sqrt(1+|Du|^2) u^{m-1} dx`.
pub fn area_functional(u: &ScalarField, p: &Params) -> Result<f64> {
    u.validate(false)?;
    let h2 = u.grid().h * u.grid().h;
    let m1 = (p.m - 1) as i32;
    let mut total = 0.0;
    for c in cell_quads(u) {
        let w = (1.0 + c.gx * c.gx + c.gy * c.gy).sqrt();
        total += w * c.mean.powi(m1) * h2;
    }
    Ok(p.sigma_m1() * total)
}

/// Exact gradient of the discrete [`area_functional`] with respect to the
/// interior node values. Boundary values are data, so their components are
/// zero.
pub fn area_gradient(u: &ScalarField, p: &Params) -> Result<ScalarField> {
    let g = u.grid().clone();
    for &k in g.interior_nodes() {
        if u.value(k) <= 0.0 {
            let (i, j) = g.ij(k);
            return Err(Error::NonPositive {
                what: "area_gradient",
                value: u.value(k),
                i,
                j,
            });
        }
    }
    let h = g.h;
    let h2 = h * h;
    let sigma = p.sigma_m1();
    let m1 = (p.m - 1) as i32;
    let mut out = ScalarField::zeros(&g);
    for c in cell_quads(u) {
        let w = (1.0 + c.gx * c.gx + c.gy * c.gy).sqrt();
        let um1 = c.mean.powi(m1);
        let um2 = if m1 == 0 { 0.0 } else { c.mean.powi(m1 - 1) };
        // corner order sw, se, nw, ne; signs of dgx/du_c and dgy/du_c
        let sgx = [-1.0, 1.0, -1.0, 1.0];
        let sgy = [-1.0, -1.0, 1.0, 1.0];
        for (c_idx, &node) in c.corners.iter().enumerate() {
            if g.class(node) != NodeClass::Interior {
                continue;
            }
            let dw = (c.gx * sgx[c_idx] + c.gy * sgy[c_idx]) / (2.0 * h) / w;
            let dmean = 0.25;
            let term = sigma * h2 * (dw * um1 + w * m1 as f64 * um2 * dmean);
            out.set(node, out.value(node) + term);
        }
    }
    Ok(out)
}

/// All pointwise graph-geometry quantities of `u`, plus the discrete check of
/// the identity `H = (m-1) nu_3 / u` (skipped and flagged when `u <= 0`
/// somewhere on the interior).
pub fn graph_geometry(u: &ScalarField, p: &Params) -> Result<GraphGeometry> {
    let g = u.grid().clone();
    let grad = gradient(u)?;
    let mc = mean_curvature_operator(u)?;
    let mut geo = GraphGeometry::new(&g);
    for k in 0..g.num_nodes() {
        if !g.is_active(k) {
            continue;
        }
        let (gx, gy) = (grad.x[k], grad.y[k]);
        let v = (1.0 + gx * gx + gy * gy).sqrt();
        geo.v[k] = v;
        geo.nu1[k] = -gx / v;
        geo.nu2[k] = -gy / v;
        geo.nu3[k] = 1.0 / v;
        geo.g11[k] = 1.0 - geo.nu1[k] * geo.nu1[k];
        geo.g12[k] = -geo.nu1[k] * geo.nu2[k];
        geo.g22[k] = 1.0 - geo.nu2[k] * geo.nu2[k];
    }
    let h = g.h;
    let nx = g.nx();
    let uv = u.values();
    for &k in g.interior_nodes() {
        let (e, w, n, s) = (k + 1, k - 1, k + nx, k - nx);
        let (ne, nw, se, sw) = (k + nx + 1, k + nx - 1, k - nx + 1, k - nx - 1);
        let uxx = (uv[e] - 2.0 * uv[k] + uv[w]) / (h * h);
        let uyy = (uv[n] - 2.0 * uv[k] + uv[s]) / (h * h);
        let uxy = (uv[ne] - uv[nw] - uv[se] + uv[sw]) / (4.0 * h * h);
        // |A|^2 = v^{-2} tr(GUGU) for the 2x2 blocks G = (g^{ij}), U = (u_{ij})
        let (g11, g12, g22) = (geo.g11[k], geo.g12[k], geo.g22[k]);
        let b11 = g11 * uxx + g12 * uxy;
        let b12 = g11 * uxy + g12 * uyy;
        let b21 = g12 * uxx + g22 * uxy;
        let b22 = g12 * uxy + g22 * uyy;
        let tr = b11 * b11 + 2.0 * b12 * b21 + b22 * b22;
        geo.a_norm_sq[k] = tr / (geo.v[k] * geo.v[k]);
        geo.h_mean[k] = mc.value(k);
    }
    // identity check H = (m-1) nu_3 / u
    let positive = g.interior_nodes().iter().all(|&k| u.value(k) > 0.0);
    if positive {
        let m1 = p.m_f() - 1.0;
        let gap = g
            .interior_nodes()
            .iter()
            .map(|&k| (geo.h_mean[k] - m1 * geo.nu3[k] / u.value(k)).abs())
            .fold(0.0, f64::max);
        geo.mean_curvature_identity_gap = Some(gap);
    } else {
        geo.identity_skipped = true;
    }
    Ok(geo)
}

/// Weak-form residual `int (Du . Dzeta / v + (m-1) zeta / (u v))` with the
/// same cell quadrature as the area functional.
///
/// `zeta` must vanish on and near the boundary (boundary nodes and their
/// interior one-ring), and `u` must be positive wherever `zeta` is nonzero.
pub fn weak_form_residual(u: &ScalarField, zeta: &ScalarField, p: &Params) -> Result<f64> {
    u.check_same_grid(zeta, "weak_form_residual")?;
    let g = u.grid().clone();
    for &k in g.boundary_nodes() {
        if zeta.value(k) != 0.0 {
            let (i, j) = g.ij(k);
            return Err(Error::Precondition(format!(
                "test function is nonzero at boundary node ({i},{j})"
            )));
        }
    }
    for &k in g.interior_nodes() {
        if zeta.value(k) == 0.0 {
            continue;
        }
        let near_boundary = (0..8).any(|d| {
            g.neighbor(k, d)
                .map(|q| g.class(q) == NodeClass::Boundary)
                .unwrap_or(false)
        });
        if near_boundary {
            let (i, j) = g.ij(k);
            return Err(Error::Precondition(format!(
                "test function is nonzero next to the boundary at node ({i},{j})"
            )));
        }
        if u.value(k) <= 0.0 {
            let (i, j) = g.ij(k);
            return Err(Error::NonPositive {
                what: "weak_form_residual",
                value: u.value(k),
                i,
                j,
            });
        }
    }
    let h = g.h;
    let h2 = h * h;
    let nx = g.nx();
    let m1 = p.m_f() - 1.0;
    let mut total = 0.0;
    for c in cell_quads(u) {
        let corners = c.corners;
        let [zsw, zse, znw, zne] = corners.map(|k| zeta.value(k));
        if zsw == 0.0 && zse == 0.0 && znw == 0.0 && zne == 0.0 {
            continue;
        }
        let zgx = (zse + zne - zsw - znw) / (2.0 * h);
        let zgy = (znw + zne - zsw - zse) / (2.0 * h);
        let zmean = 0.25 * (zsw + zse + znw + zne);
        let w = (1.0 + c.gx * c.gx + c.gy * c.gy).sqrt();
        debug_assert!(c.mean > 0.0);
        total += ((c.gx * zgx + c.gy * zgy) / w + m1 * zmean / (c.mean * w)) * h2;
        let _ = nx;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, Grid2D};
    use std::sync::Arc;

    fn annulus_grid(h: f64) -> Arc<Grid2D> {
        Grid2D::new(Domain::annulus(0.2, 1.0), h).unwrap()
    }

    #[test]
    fn gradient_exact_on_affine() {
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 32.0).unwrap();
        let u = ScalarField::from_fn(&g, |x, y| 3.0 * x + 2.0 * y);
        let grad = gradient(&u).unwrap();
        for &k in g.interior_nodes() {
            assert!((grad.x[k] - 3.0).abs() < 1e-11);
            assert!((grad.y[k] - 2.0).abs() < 1e-11);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 16.0).unwrap();
        let u = ScalarField::constant(&g, 4.0);
        let grad = gradient(&u).unwrap();
        for k in 0..g.num_nodes() {
            assert_eq!(grad.x[k], 0.0);
            assert_eq!(grad.y[k], 0.0);
        }
    }

    #[test]
    fn gradient_of_cone_second_order() {
        // |D|x|| = x/|x| away from the axes; grid refinement shows O(h^2)
        let mut errs = Vec::new();
        for lev in [32.0, 64.0] {
            let g = annulus_grid(1.0 / lev);
            let u = ScalarField::from_fn(&g, |x, y| x.hypot(y));
            let grad = gradient(&u).unwrap();
            let mut err: f64 = 0.0;
            for &k in g.interior_nodes() {
                let (x, y) = g.node_xy(k);
                let r = x.hypot(y);
                // stay away from the boundary ring where one-sided stencils kick in
                if r < 0.3 || r > 0.9 || x.abs() < 0.1 || y.abs() < 0.1 {
                    continue;
                }
                err = err.max((grad.x[k] - x / r).abs().max((grad.y[k] - y / r).abs()));
            }
            errs.push(err);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 1.7, "gradient rate {rate}, errors {errs:?}");
    }

    #[test]
    fn mean_curvature_zero_on_affine() {
        let g = annulus_grid(1.0 / 32.0);
        let u = ScalarField::from_fn(&g, |x, y| 1.0 + 0.7 * x - 0.3 * y);
        let mc = mean_curvature_operator(&u).unwrap();
        assert!(mc.max_abs_interior() < 1e-10);
    }

    #[test]
    fn mean_curvature_of_parabola() {
        // u = x^2 has M(u) = 2 / (1+4x^2)^{3/2}; check O(h^2)
        let mut errs = Vec::new();
        for lev in [32.0, 64.0] {
            let g = Grid2D::new(Domain::unit_disk(), 1.0 / lev).unwrap();
            let u = ScalarField::from_fn(&g, |x, _| x * x);
            let mc = mean_curvature_operator(&u).unwrap();
            let mut err: f64 = 0.0;
            for &k in g.interior_nodes() {
                let (x, y) = g.node_xy(k);
                if x.hypot(y) > 0.8 {
                    continue;
                }
                let exact = 2.0 / (1.0 + 4.0 * x * x).powf(1.5);
                err = err.max((mc.value(k) - exact).abs());
            }
            errs.push(err);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 1.7, "mean curvature rate {rate}, errors {errs:?}");
    }

    #[test]
    fn mean_curvature_of_radial_cone() {
        // u = a|x| with a = 1 (m = n = 2): M(u) -> a(n-1)/(|x| sqrt(1+a^2))
        let g = annulus_grid(1.0 / 64.0);
        let u = ScalarField::from_fn(&g, |x, y| x.hypot(y));
        let mc = mean_curvature_operator(&u).unwrap();
        let mut err: f64 = 0.0;
        for &k in g.interior_nodes() {
            let (x, y) = g.node_xy(k);
            let r = x.hypot(y);
            if r < 0.3 || r > 0.9 {
                continue;
            }
            let exact = 1.0 / (r * 2.0_f64.sqrt());
            err = err.max((mc.value(k) - exact).abs());
        }
        assert!(err < 0.02, "cone mean curvature error {err}");
    }

    #[test]
    fn residual_vanishes_on_cone_solution() {
        let p = Params::new(2, 2).unwrap();
        let mut errs = Vec::new();
        for lev in [32.0, 64.0] {
            let g = annulus_grid(1.0 / lev);
            let u = ScalarField::from_fn(&g, |x, y| x.hypot(y));
            let res = sme_residual(&u, &p).unwrap();
            let mut err: f64 = 0.0;
            for &k in g.interior_nodes() {
                err = err.max(res.value(k).abs());
            }
            errs.push(err);
        }
        // order >= 1 under refinement
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 0.9, "residual rate {rate}, errors {errs:?}");
    }

    #[test]
    fn residual_on_constant_field() {
        let p = Params::new(3, 2).unwrap();
        let g = annulus_grid(1.0 / 16.0);
        let c = 2.5;
        let u = ScalarField::constant(&g, c);
        let res = sme_residual(&u, &p).unwrap();
        for &k in g.interior_nodes() {
            assert!((res.value(k) + (p.m_f() - 1.0) / c).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_refuses_nonpositive_u() {
        let p = Params::new(2, 2).unwrap();
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 8.0).unwrap();
        let u = ScalarField::from_fn(&g, |x, _| x); // negative on half the disk
        match sme_residual(&u, &p) {
            Err(Error::NonPositive { what, .. }) => assert_eq!(what, "sme_residual"),
            other => panic!("expected NonPositive, got {other:?}"),
        }
    }

    #[test]
    fn area_of_constant_on_unit_square() {
        let p = Params::new(2, 2).unwrap();
        let g = Grid2D::new(
            Domain::Rect {
                x0: 0.0,
                y0: 0.0,
                x1: 1.0,
                y1: 1.0,
            },
            1.0 / 32.0,
        )
        .unwrap();
        let c = 0.7;
        let u = ScalarField::constant(&g, c);
        let a = area_functional(&u, &p).unwrap();
        let exact = 2.0 * std::f64::consts::PI * c;
        assert!((a - exact).abs() < 1e-10, "{a} vs {exact}");
        let zero = ScalarField::constant(&g, 0.0);
        assert_eq!(area_functional(&zero, &p).unwrap(), 0.0);
    }

    #[test]
    fn area_scales_geometrically() {
        // A(lambda u(. / lambda)) on lambda Omega = lambda^{n+m-1} A(u)
        let p = Params::new(3, 2).unwrap();
        let g = annulus_grid(1.0 / 32.0);
        let u = ScalarField::from_fn(&g, |x, y| 1.0 + 0.3 * (2.0 * x).sin() + 0.2 * y);
        let a = area_functional(&u, &p).unwrap();
        let lam = 2.0;
        let gs = Grid2D::new(g.domain.scaled(lam), g.h * lam).unwrap();
        let us = ScalarField::from_fn(&gs, |x, y| {
            lam * (1.0 + 0.3 * (2.0 * x / lam).sin() + 0.2 * y / lam)
        });
        let asc = area_functional(&us, &p).unwrap();
        let expect = lam.powi((p.n + p.m - 1) as i32) * a;
        assert!(
            (asc - expect).abs() < 1e-9 * expect.abs(),
            "{asc} vs {expect}"
        );
    }

    #[test]
    fn area_gradient_constant_field_component() {
        // flat field: gradient component is sigma (m-1) c^{m-2} * (cell weight)
        let p = Params::new(3, 2).unwrap();
        let g = Grid2D::new(
            Domain::Rect {
                x0: 0.0,
                y0: 0.0,
                x1: 1.0,
                y1: 1.0,
            },
            1.0 / 8.0,
        )
        .unwrap();
        let c = 1.3;
        let u = ScalarField::constant(&g, c);
        let grad = area_gradient(&u, &p).unwrap();
        let h2 = g.h * g.h;
        // a node surrounded by four quadrature cells
        let k = g
            .interior_nodes()
            .iter()
            .copied()
            .find(|&k| {
                let (x, y) = g.node_xy(k);
                (x - 0.5).abs() < 1e-9 && (y - 0.5).abs() < 1e-9
            })
            .unwrap();
        let expect = p.sigma_m1() * (p.m_f() - 1.0) * c * h2;
        assert!((grad.value(k) - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn area_gradient_matches_finite_differences() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let p = Params::new(2, 2).unwrap();
        let g = annulus_grid(1.0 / 16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let (a, b, c) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let u = ScalarField::from_fn(&g, |x, y| {
                1.0 + 0.4 * (a + 3.0 * x).sin() * (b + 2.0 * y).cos() + 0.2 * c * x
            });
            let grad = area_gradient(&u, &p).unwrap();
            // random direction supported on the interior
            let mut w = ScalarField::zeros(&g);
            for &k in g.interior_nodes() {
                w.set(k, rng.gen::<f64>() - 0.5);
            }
            let dot: f64 = g
                .interior_nodes()
                .iter()
                .map(|&k| grad.value(k) * w.value(k))
                .sum();
            let eps = 1e-6;
            let up = perturb(&u, &w, eps);
            let um = perturb(&u, &w, -eps);
            let fd = (area_functional(&up, &p).unwrap() - area_functional(&um, &p).unwrap())
                / (2.0 * eps);
            assert!(
                (dot - fd).abs() < 1e-6 * dot.abs().max(1.0),
                "analytic {dot} vs fd {fd}"
            );
        }
    }

    fn perturb(u: &ScalarField, w: &ScalarField, eps: f64) -> ScalarField {
        let mut out = u.clone();
        for &k in u.grid().interior_nodes() {
            out.set(k, u.value(k) + eps * w.value(k));
        }
        out
    }

    #[test]
    fn graph_geometry_affine_is_flat() {
        let p = Params::new(2, 2).unwrap();
        let g = annulus_grid(1.0 / 16.0);
        let u = ScalarField::from_fn(&g, |x, y| 2.0 + x - 0.5 * y);
        let geo = graph_geometry(&u, &p).unwrap();
        geo.validate().unwrap();
        for &k in g.interior_nodes() {
            assert!(geo.h_mean[k].abs() < 1e-10);
            assert!(geo.a_norm_sq[k].abs() < 1e-10);
        }
    }

    #[test]
    fn graph_geometry_of_cone() {
        // nu_3 = 1/sqrt(2), H = 1/(sqrt(2)|x|) for u = |x| (m = n = 2)
        let p = Params::new(2, 2).unwrap();
        let g = annulus_grid(1.0 / 64.0);
        let u = ScalarField::from_fn(&g, |x, y| x.hypot(y));
        let geo = graph_geometry(&u, &p).unwrap();
        geo.validate().unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        for &k in g.interior_nodes() {
            let (x, y) = g.node_xy(k);
            let r = x.hypot(y);
            if r < 0.3 || r > 0.9 {
                continue;
            }
            assert!((geo.nu3[k] - inv_sqrt2).abs() < 5e-3);
            assert!((geo.h_mean[k] - inv_sqrt2 / r).abs() < 0.05);
        }
        // identity gap is reported (cone solves the equation exactly)
        let gap = geo.mean_curvature_identity_gap.unwrap();
        assert!(gap < 0.2, "identity gap {gap}");
    }

    #[test]
    fn graph_geometry_parabola_second_fundamental_form() {
        // central differences are exact on x^2, so |A|^2 = 4/(1+4x^2)^3 holds
        // to rounding (well within the O(h^2) budget)
        let p = Params::new(2, 2).unwrap();
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 32.0).unwrap();
        let u = ScalarField::from_fn(&g, |x, _| x * x);
        let geo = graph_geometry(&u, &p).unwrap();
        for &k in g.interior_nodes() {
            let (x, _) = g.node_xy(k);
            let exact = 4.0 / (1.0 + 4.0 * x * x).powi(3);
            assert!((geo.a_norm_sq[k] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_geometry_second_fundamental_form_rate() {
        // a non-polynomial graph exercises the truncation error: O(h^2)
        let p = Params::new(2, 2).unwrap();
        let mut errs = Vec::new();
        for lev in [32.0, 64.0] {
            let g = Grid2D::new(Domain::unit_disk(), 1.0 / lev).unwrap();
            let u = ScalarField::from_fn(&g, |x, _| (2.0 * x).sin());
            let geo = graph_geometry(&u, &p).unwrap();
            let mut err: f64 = 0.0;
            for &k in g.interior_nodes() {
                let (x, y) = g.node_xy(k);
                if x.hypot(y) > 0.8 {
                    continue;
                }
                // one-variable graph: |A|^2 = u''^2 / (1 + u'^2)^3
                let up = 2.0 * (2.0 * x).cos();
                let upp = -4.0 * (2.0 * x).sin();
                let exact = upp * upp / (1.0 + up * up).powi(3);
                err = err.max((geo.a_norm_sq[k] - exact).abs());
            }
            errs.push(err);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 1.7, "|A|^2 rate {rate}, errors {errs:?}");
    }

    #[test]
    fn weak_form_zero_test_function() {
        let p = Params::new(2, 2).unwrap();
        let g = annulus_grid(1.0 / 16.0);
        let u = ScalarField::constant(&g, 1.0);
        let zeta = ScalarField::zeros(&g);
        assert_eq!(weak_form_residual(&u, &zeta, &p).unwrap(), 0.0);
    }

    #[test]
    fn weak_form_constant_u_positive_bump() {
        let p = Params::new(2, 2).unwrap();
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 32.0).unwrap();
        let c = 2.0;
        let u = ScalarField::constant(&g, c);
        let zeta = ScalarField::from_fn(&g, |x, y| bump(x.hypot(y) / 0.5));
        let res = weak_form_residual(&u, &zeta, &p).unwrap();
        // gradient term cancels in the cell sum for constant u; the mass term
        // equals (m-1)/c * int zeta > 0
        let mass: f64 = g
            .cells()
            .iter()
            .map(|&k| {
                let nx = g.nx();
                let z = [k, k + 1, k + nx, k + nx + 1]
                    .map(|c| zeta.value(c))
                    .iter()
                    .sum::<f64>()
                    / 4.0;
                z * g.h * g.h
            })
            .sum();
        assert!((res - (p.m_f() - 1.0) / c * mass).abs() < 1e-12);
        assert!(res > 0.0);
    }

    #[test]
    fn weak_form_rejects_boundary_support() {
        let p = Params::new(2, 2).unwrap();
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 16.0).unwrap();
        let u = ScalarField::constant(&g, 1.0);
        let zeta = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            weak_form_residual(&u, &zeta, &p),
            Err(Error::Precondition(_))
        ));
    }

    /// Smooth bump: exp(1 - 1/(1-t^2)) for |t| < 1, else 0.
    fn bump(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}
