//! Dirichlet solver on 2-D grids.
//!
//! The iteration freezes the gradient in the quasilinear operator and
//! solves the linear problem
//!
//! ```text
//! a_ij(Dv) D_ij u = (m-1) / max(v, delta),   a_ij(p) = delta_ij - p_i p_j / (1+|p|^2),
//! ```
//!
//! with Dirichlet data, then damps and floors the iterate at `delta`. The
//! floor enters the right side only; fixed points with an inactive floor
//! solve the equation, while a persistently active floor across a shrinking
//! `delta` sequence is the non-solvability signal. An optional Newton
//! refinement linearizes the full residual for quadratic convergence.
//!
//! Boundary values enter through cut-cell legs: a stencil reference from an
//! interior node to a boundary node is replaced by linear interpolation
//! between the node and the Dirichlet value at the leg's boundary crossing.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid2D;
use crate::linsolve::{bicgstab, Csr, CsrBuilder, Ilu0};
use crate::ops;
use crate::params::Params;
use crate::radial::RadialProfile;
use std::sync::Arc;

/// Legs steeper than this fold back into the diagonal; shorter crossings
/// take the Dirichlet value directly (the position error is below theta_min * h).
const THETA_MIN: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    /// Positivity floor `delta`; iterates are clamped at it and the right
    /// side uses `max(v, delta)`.
    pub delta: f64,
    /// Convergence threshold for the max-norm residual on `{u > 2 delta}`.
    pub tol_residual: f64,
    pub max_outer_iters: usize,
    /// Damping factor in `(0, 1]` for the Picard update.
    pub damping: f64,
    pub linear_tol: f64,
    pub linear_max_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            delta: 1e-2,
            tol_residual: 1e-6,
            max_outer_iters: 80,
            damping: 0.5,
            linear_tol: 1e-8,
            linear_max_iters: 20_000,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::BadParams(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::BadParams(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol_residual > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::BadParams("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Dirichlet boundary data, evaluable at continuum boundary points.
#[derive(Clone)]
pub enum BoundaryData {
    Constant(f64),
    /// Trace of the cone `slope * |x - center|`.
    ConeTrace { cx: f64, cy: f64, slope: f64 },
    /// Trace of a tabulated radial profile centered at `(cx, cy)`.
    RadialTrace {
        profile: Arc<RadialProfile>,
        cx: f64,
        cy: f64,
    },
    Fn(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryData::Constant(c) => write!(f, "Constant({c})"),
            BoundaryData::ConeTrace { cx, cy, slope } => {
                write!(f, "ConeTrace(({cx},{cy}), slope={slope})")
            }
            BoundaryData::RadialTrace { cx, cy, .. } => write!(f, "RadialTrace(({cx},{cy}))"),
            BoundaryData::Fn(_) => write!(f, "Fn(..)"),
        }
    }
}

impl BoundaryData {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::ConeTrace { cx, cy, slope } => slope * (x - cx).hypot(y - cy),
            BoundaryData::RadialTrace { profile, cx, cy } => {
                profile.height_at((x - cx).hypot(y - cy))
            }
            BoundaryData::Fn(f) => f(x, y),
        }
    }

    /// Pointwise rescaled data `factor * phi`.
    pub fn scaled(&self, factor: f64) -> BoundaryData {
        match self {
            BoundaryData::Constant(c) => BoundaryData::Constant(factor * c),
            BoundaryData::ConeTrace { cx, cy, slope } => BoundaryData::ConeTrace {
                cx: *cx,
                cy: *cy,
                slope: factor * slope,
            },
            other => {
                let inner = other.clone();
                BoundaryData::Fn(Arc::new(move |x, y| factor * inner.eval(x, y)))
            }
        }
    }

    /// Min and max over the grid's boundary attachment points.
    pub fn range_on(&self, grid: &Grid2D) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut mean = (0.0, 0usize);
        for &k in grid.interior_nodes() {
            for d in 0..8 {
                if let Some(leg) = grid.leg(k, d) {
                    let v = self.eval(leg.px, leg.py);
                    lo = lo.min(v);
                    hi = hi.max(v);
                    mean = (mean.0 + v, mean.1 + 1);
                }
            }
        }
        (lo, hi)
    }

    /// Mean over the grid's boundary attachment points.
    pub fn mean_on(&self, grid: &Grid2D) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &k in grid.interior_nodes() {
            for d in 0..8 {
                if let Some(leg) = grid.leg(k, d) {
                    sum += self.eval(leg.px, leg.py);
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Convergence record of a Dirichlet solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub u: ScalarField,
    pub converged: bool,
    pub outer_iters: usize,
    /// Max-norm equation residual on `{u > 2 delta}` at exit.
    pub final_residual: f64,
    pub min_u: f64,
    pub max_grad: f64,
    /// True when the iterate sits on the floor (`min_u <= delta (1 + 1e-6)`).
    pub floor_active: bool,
}

/// One frozen-coefficient solve `a_ij(Dv) D_ij u = (m-1)/max(v, delta)` with
/// the given Dirichlet data. Returns the linear solution (not floored).
pub fn linearized_step(
    v: &ScalarField,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
) -> Result<ScalarField> {
    linearized_step_with_guess(v, boundary, p, cfg, None, cfg.linear_tol)
}

fn linearized_step_with_guess(
    v: &ScalarField,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
    guess: Option<&ScalarField>,
    linear_tol: f64,
) -> Result<ScalarField> {
    cfg.validate()?;
    v.validate(false)?;
    let grid = v.grid().clone();
    let interior = grid.interior_nodes();
    let n = interior.len();
    let h = grid.h;
    let h2 = h * h;
    let m1 = p.m_f() - 1.0;

    let mut builder = CsrBuilder::new(n);
    let mut rhs = vec![0.0; n];
    for (row, &k) in interior.iter().enumerate() {
        // freeze the coefficients at the ghost-closed gradient of v, the
        // same convention the residual uses, so fixed points have zero
        // residual in exact arithmetic
        let patch = ghost_patch(v, boundary, k);
        let p1 = (patch[5] - patch[3]) / (2.0 * h);
        let p2 = (patch[7] - patch[1]) / (2.0 * h);
        let den = 1.0 + p1 * p1 + p2 * p2;
        let a11 = 1.0 - p1 * p1 / den;
        let a12 = -p1 * p2 / den;
        let a22 = 1.0 - p2 * p2 / den;
        // a11 u_xx + 2 a12 u_xy + a22 u_yy with central stencils
        let weights: [(usize, f64); 8] = [
            (0, a11 / h2),         // E
            (1, a11 / h2),         // W
            (2, a22 / h2),         // N
            (3, a22 / h2),         // S
            (4, a12 / (2.0 * h2)), // NE
            (5, -a12 / (2.0 * h2)), // SE
            (6, -a12 / (2.0 * h2)), // NW
            (7, a12 / (2.0 * h2)), // SW
        ];
        builder.add(row, row, -2.0 * (a11 + a22) / h2);
        rhs[row] = m1 / v.value(k).max(cfg.delta);
        for (d, w) in weights {
            if w == 0.0 {
                continue;
            }
            let q = grid.neighbor(k, d).expect("interior one-ring on lattice");
            match grid.interior_rank(q) {
                Some(col) => builder.add(row, col, w),
                None => {
                    let leg = grid.leg(k, d).expect("boundary neighbor has a leg");
                    let phi = boundary.eval(leg.px, leg.py);
                    if leg.theta < THETA_MIN {
                        rhs[row] -= w * phi;
                    } else {
                        // ghost value phi/theta - (1-theta)/theta * u_k
                        rhs[row] -= w * phi / leg.theta;
                        builder.add(row, row, -w * (1.0 - leg.theta) / leg.theta);
                    }
                }
            }
        }
    }
    let a: Csr = builder.build();
    let precond = Ilu0::new(&a)?;
    let mut x = vec![0.0; n];
    if let Some(g) = guess {
        for (row, &k) in interior.iter().enumerate() {
            x[row] = g.value(k);
        }
        if std::env::var("SME_TRACE").is_ok() {
            let mut ax = vec![0.0; n];
            a.matvec(&x, &mut ax);
            let max_r = ax
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            let ghost_r = ghost_residual(g, boundary, p).max_abs_interior();
            eprintln!("  assembled |Ax-b|_inf = {max_r:.3e}, ghost residual = {ghost_r:.3e}");
        }
    }
    bicgstab(&a, &precond, &rhs, &mut x, linear_tol, cfg.linear_max_iters)?;

    let mut out = ScalarField::zeros(&grid);
    for (row, &k) in interior.iter().enumerate() {
        out.set(k, x[row]);
    }
    attach_boundary_values(&mut out, boundary);
    Ok(out)
}

/// Store Dirichlet data at boundary nodes (value at the nearest continuum
/// boundary point).
pub fn attach_boundary_values(u: &mut ScalarField, boundary: &BoundaryData) {
    let grid = u.grid().clone();
    for &k in grid.boundary_nodes() {
        let (px, py) = grid
            .boundary_projection(k)
            .expect("boundary nodes have projections");
        u.set(k, boundary.eval(px, py));
    }
}

/// Equation residual at interior nodes in the solver's convention:
/// `(a_ij(Du) D_ij u - (m-1)/u) / v`, which coincides with
/// `M(u) - (m-1)/(u v)` in the continuum, evaluated with the same cut-cell
/// ghost closure and frozen-gradient stencils as the assembled systems.
/// Fixed points of the Picard map therefore drive it to the algebraic
/// tolerance instead of plateauing at the truncation gap between the two
/// discretization routes.
pub(crate) fn ghost_residual(
    u: &ScalarField,
    boundary: &BoundaryData,
    p: &Params,
) -> ScalarField {
    let grid = u.grid().clone();
    let mut out = ScalarField::zeros(&grid);
    let m1 = p.m_f() - 1.0;
    for &k in grid.interior_nodes() {
        let patch = ghost_patch(u, boundary, k);
        let (f, v) = patch_a_form(&patch, grid.h, m1, u.value(k));
        out.set(k, f / v);
    }
    out
}

/// 3x3 patch of values around an interior node with boundary neighbors
/// replaced by their leg ghosts. Order: [SW, S, SE, W, C, E, NW, N, NE].
fn ghost_patch(u: &ScalarField, boundary: &BoundaryData, k: usize) -> [f64; 9] {
    let grid = u.grid();
    let uc = u.value(k);
    let mut patch = [0.0; 9];
    patch[4] = uc;
    // map dir index -> patch slot: E W N S NE SE NW SW
    const SLOT: [usize; 8] = [5, 3, 7, 1, 8, 2, 6, 0];
    for d in 0..8 {
        let q = grid.neighbor(k, d).expect("interior one-ring on lattice");
        let val = match grid.interior_rank(q) {
            Some(_) => u.value(q),
            None => {
                let leg = grid.leg(k, d).expect("boundary neighbor has a leg");
                let phi = boundary.eval(leg.px, leg.py);
                if leg.theta < THETA_MIN {
                    phi
                } else {
                    phi / leg.theta - (1.0 - leg.theta) / leg.theta * uc
                }
            }
        };
        patch[SLOT[d]] = val;
    }
    patch
}

/// Unscaled a-form residual `a_ij(Du) D_ij u - (m-1)/u` and the area
/// element `v` on a ghost-closed patch.
fn patch_a_form(patch: &[f64; 9], h: f64, m1: f64, uc: f64) -> (f64, f64) {
    let [sw, s, se, w, c, e, nw, n, ne] = *patch;
    let gx = (e - w) / (2.0 * h);
    let gy = (n - s) / (2.0 * h);
    let den = 1.0 + gx * gx + gy * gy;
    let a11 = 1.0 - gx * gx / den;
    let a12 = -gx * gy / den;
    let a22 = 1.0 - gy * gy / den;
    let uxx = (e - 2.0 * c + w) / (h * h);
    let uyy = (n - 2.0 * c + s) / (h * h);
    let uxy = (ne - nw - se + sw) / (4.0 * h * h);
    (
        a11 * uxx + 2.0 * a12 * uxy + a22 * uyy - m1 / uc,
        den.sqrt(),
    )
}

/// Max-norm of the ghost-convention residual over `{u > 2 delta}`.
fn masked_residual(res: &ScalarField, u: &ScalarField, delta: f64) -> f64 {
    u.grid()
        .interior_nodes()
        .iter()
        .filter(|&&k| u.value(k) > 2.0 * delta)
        .map(|&k| res.value(k).abs())
        .fold(0.0, f64::max)
}

fn outcome_from(
    u: ScalarField,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
    converged: bool,
    outer_iters: usize,
) -> Result<SolveOutcome> {
    let res = ghost_residual(&u, boundary, p);
    let final_residual = masked_residual(&res, &u, cfg.delta);
    let min_u = u.min_interior();
    let max_grad = ops::gradient(&u)?.max_norm_interior();
    Ok(SolveOutcome {
        floor_active: min_u <= cfg.delta * (1.0 + 1e-6),
        u,
        converged,
        outer_iters,
        final_residual,
        min_u,
        max_grad,
    })
}

/// Damped Picard iteration of [`linearized_step`] with the floor applied to
/// the iterates. Non-convergence after `max_outer_iters` is an outcome, not
/// an error.
pub fn solve_dirichlet(
    grid: &Arc<Grid2D>,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    solve_dirichlet_from(grid, boundary, p, cfg, None)
}

/// [`solve_dirichlet`] warm-started from a previous iterate.
pub fn solve_dirichlet_from(
    grid: &Arc<Grid2D>,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
    warm: Option<&ScalarField>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let (phi_min, _phi_max) = boundary.range_on(grid);
    if !(phi_min > 0.0) {
        return Err(Error::Precondition(format!(
            "boundary data must be positive, min over attachment points is {phi_min}"
        )));
    }

    // initial iterate: linear solve with constant coefficient field
    let mut u = match warm {
        Some(w) => {
            u_check_grid(w, grid)?;
            w.clone()
        }
        None => {
            let v0 = boundary.mean_on(grid).max(2.0 * cfg.delta);
            let v = ScalarField::constant(grid, v0);
            linearized_step_with_guess(&v, boundary, p, cfg, None, 1e-3)?
        }
    };
    u = floor_field(&u, cfg.delta);

    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_outer_iters {
        let lin_tol = (0.1 * residual).clamp(cfg.linear_tol, 1e-3);
        let step = match linearized_step_with_guess(&u, boundary, p, cfg, Some(&u), lin_tol) {
            Ok(s) => s,
            Err(Error::LinearSolve { .. }) if iter > 1 => {
                // report what we have instead of aborting the sweep
                return outcome_from(u, boundary, p, cfg, false, iter);
            }
            Err(e) => return Err(e),
        };
        let mut next = u.clone();
        for &k in grid.interior_nodes() {
            let blended =
                (1.0 - cfg.damping) * u.value(k) + cfg.damping * step.value(k);
            next.set(k, blended.max(cfg.delta));
        }
        let diff = next.max_diff_interior(&u)?;
        u = next;
        let res = ghost_residual(&u, boundary, p);
        residual = masked_residual(&res, &u, cfg.delta);
        if std::env::var("SME_TRACE").is_ok() {
            eprintln!("iter {iter}: diff={diff:.3e} residual={residual:.3e}");
        }
        if residual <= cfg.tol_residual && diff < cfg.tol_residual * grid.h {
            return outcome_from(u, boundary, p, cfg, true, iter);
        }
        // successive-iterate stagnation with a residual that stopped moving:
        // the damped map has settled on a floored fixed point
        if diff < 1e-13 {
            return outcome_from(u, boundary, p, cfg, residual <= cfg.tol_residual, iter);
        }
    }
    outcome_from(u, boundary, p, cfg, false, cfg.max_outer_iters)
}

fn u_check_grid(u: &ScalarField, grid: &Arc<Grid2D>) -> Result<()> {
    if u.grid().same_layout(grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            op: "solve_dirichlet warm start",
        })
    }
}

fn floor_field(u: &ScalarField, delta: f64) -> ScalarField {
    u.map_interior(|v| v.max(delta))
}

/// Newton refinement of a near-solution: linearizes the full residual
/// (including the reaction term) and backtracks when a step would not
/// reduce it, falling back to a Picard step if no decrease is found.
pub fn newton_refine(
    u0: &ScalarField,
    boundary: &BoundaryData,
    p: &Params,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    for &k in grid.interior_nodes() {
        if u0.value(k) <= 2.0 * cfg.delta {
            let (i, j) = grid.ij(k);
            return Err(Error::Precondition(format!(
                "newton_refine needs u > 2 delta everywhere; u = {} at ({i},{j})",
                u0.value(k)
            )));
        }
    }
    let mut u = u0.clone();
    attach_boundary_values(&mut u, boundary);
    let interior = grid.interior_nodes();
    let n = interior.len();

    let mut residual = ghost_residual(&u, boundary, p).max_abs_interior();
    let mut iters = 0usize;
    let max_newton = 30usize.min(cfg.max_outer_iters.max(1));

    while residual > cfg.tol_residual && iters < max_newton {
        iters += 1;
        let (jac, rhs) = assemble_jacobian(&u, boundary, p)?;
        let precond = match Ilu0::new(&jac) {
            Ok(pc) => pc,
            Err(_) => {
                // singular factorization: fall back to one damped Picard pass
                let out = solve_dirichlet_from(&grid, boundary, p, cfg, Some(&u))?;
                return Ok(SolveOutcome {
                    outer_iters: iters + out.outer_iters,
                    ..out
                });
            }
        };
        let mut delta_u = vec![0.0; n];
        if bicgstab(
            &jac,
            &precond,
            &rhs,
            &mut delta_u,
            cfg.linear_tol,
            cfg.linear_max_iters,
        )
        .is_err()
        {
            let out = solve_dirichlet_from(&grid, boundary, p, cfg, Some(&u))?;
            return Ok(SolveOutcome {
                outer_iters: iters + out.outer_iters,
                ..out
            });
        }
        let mut accepted = false;
        for scale in [1.0, 0.5, 0.25, 0.125] {
            let mut trial = u.clone();
            for (row, &k) in interior.iter().enumerate() {
                trial.set(k, u.value(k) + scale * delta_u[row]);
            }
            if trial.min_interior() <= 0.0 {
                continue;
            }
            let trial_res = ghost_residual(&trial, boundary, p).max_abs_interior();
            if trial_res < residual {
                u = trial;
                residual = trial_res;
                accepted = true;
                break;
            }
        }
        if !accepted {
            // Newton stalled; one damped Picard pass instead
            let cfg_single = SolveConfig {
                max_outer_iters: 1,
                ..*cfg
            };
            let out = solve_dirichlet_from(&grid, boundary, p, &cfg_single, Some(&u))?;
            u = out.u;
            let new_res = ghost_residual(&u, boundary, p).max_abs_interior();
            if new_res >= residual {
                break; // no progress from either method
            }
            residual = new_res;
        }
    }
    let converged = residual <= cfg.tol_residual;
    let min_u = u.min_interior();
    let max_grad = ops::gradient(&u)?.max_norm_interior();
    Ok(SolveOutcome {
        floor_active: min_u <= cfg.delta * (1.0 + 1e-6),
        u,
        converged,
        outer_iters: iters,
        final_residual: residual,
        min_u,
        max_grad,
    })
}

/// Jacobian of the unscaled a-form residual `F(u) = a_ij(Du) D_ij u - (m-1)/u`
/// and `-F` as right-hand side. The Newton direction also reduces the
/// reported residual `F/v` since `v >= 1` varies slowly along the step.
fn assemble_jacobian(
    u: &ScalarField,
    boundary: &BoundaryData,
    p: &Params,
) -> Result<(Csr, Vec<f64>)> {
    let grid = u.grid().clone();
    let interior = grid.interior_nodes();
    let n = interior.len();
    let h = grid.h;
    let h2 = h * h;
    let m1 = p.m_f() - 1.0;
    let mut builder = CsrBuilder::new(n);
    let mut rhs = vec![0.0; n];

    // patch slot of each dir (E W N S NE SE NW SW); center is slot 4
    const SLOT: [usize; 8] = [5, 3, 7, 1, 8, 2, 6, 0];

    for (row, &k) in interior.iter().enumerate() {
        let patch = ghost_patch(u, boundary, k);
        let [sw, s, se, w, c, e, nw, nh, ne] = patch;
        let gx = (e - w) / (2.0 * h);
        let gy = (nh - s) / (2.0 * h);
        let den = 1.0 + gx * gx + gy * gy;
        let a11 = 1.0 - gx * gx / den;
        let a12 = -gx * gy / den;
        let a22 = 1.0 - gy * gy / den;
        let uxx = (e - 2.0 * c + w) / h2;
        let uyy = (nh - 2.0 * c + s) / h2;
        let uxy = (ne - nw - se + sw) / (4.0 * h2);
        rhs[row] = -(a11 * uxx + 2.0 * a12 * uxy + a22 * uyy - m1 / c);

        let mut dslot = [0.0f64; 9];
        // frozen-coefficient part: d(second differences)
        dslot[5] += a11 / h2;
        dslot[3] += a11 / h2;
        dslot[4] += -2.0 * a11 / h2;
        dslot[7] += a22 / h2;
        dslot[1] += a22 / h2;
        dslot[4] += -2.0 * a22 / h2;
        let cx = 2.0 * a12 / (4.0 * h2);
        dslot[8] += cx;
        dslot[0] += cx;
        dslot[6] -= cx;
        dslot[2] -= cx;
        // coefficient sensitivity: d(a_ij)/d(gx, gy) times the second derivatives
        let da11_dgx = -2.0 * gx * (1.0 + gy * gy) / (den * den);
        let da11_dgy = 2.0 * gx * gx * gy / (den * den);
        let da22_dgx = 2.0 * gy * gy * gx / (den * den);
        let da22_dgy = -2.0 * gy * (1.0 + gx * gx) / (den * den);
        let da12_dgx = -gy * (1.0 - gx * gx + gy * gy) / (den * den);
        let da12_dgy = -gx * (1.0 + gx * gx - gy * gy) / (den * den);
        let df_dgx = da11_dgx * uxx + 2.0 * da12_dgx * uxy + da22_dgx * uyy;
        let df_dgy = da11_dgy * uxx + 2.0 * da12_dgy * uxy + da22_dgy * uyy;
        dslot[5] += df_dgx / (2.0 * h);
        dslot[3] -= df_dgx / (2.0 * h);
        dslot[7] += df_dgy / (2.0 * h);
        dslot[1] -= df_dgy / (2.0 * h);
        // reaction term -(m-1)/u_c
        dslot[4] += m1 / (c * c);

        // map patch slots to matrix columns; ghosts feed back into the center
        builder.add(row, row, dslot[4]);
        for d in 0..8 {
            let coeff = dslot[SLOT[d]];
            if coeff == 0.0 {
                continue;
            }
            let q = grid.neighbor(k, d).expect("one-ring");
            match grid.interior_rank(q) {
                Some(col) => builder.add(row, col, coeff),
                None => {
                    let leg = grid.leg(k, d).expect("leg");
                    if leg.theta >= THETA_MIN {
                        builder.add(row, row, -coeff * (1.0 - leg.theta) / leg.theta);
                    }
                    // theta below the cutoff: ghost is pure data, no column
                }
            }
        }
    }
    Ok((builder.build(), rhs))
}
