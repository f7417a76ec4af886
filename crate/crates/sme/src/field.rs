//! Scalar and vector fields on a grid.
//!
//! Fields are immutable snapshots once built (interior mutation happens
//! through [`ScalarField::map_interior`] and friends, which produce new
//! fields). Values are stored densely over the lattice; entries at
//! `Outside` nodes are zero and never read.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, NodeClass};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn constant(grid: &Arc<Grid2D>, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        for k in 0..grid.num_nodes() {
            if grid.is_active(k) {
                f.values[k] = c;
            }
        }
        f
    }

    /// Evaluate `f(x, y)` at every active node.
    pub fn from_fn(grid: &Arc<Grid2D>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for k in 0..grid.num_nodes() {
            if grid.is_active(k) {
                let (x, y) = grid.node_xy(k);
                out.values[k] = f(x, y);
            }
        }
        out
    }

    pub fn from_values(grid: &Arc<Grid2D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::Structural(format!(
                "value vector length {} does not match grid ({} nodes)",
                values.len(),
                grid.num_nodes()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&mut self, k: usize, v: f64) {
        self.values[k] = v;
    }

    /// New field with `f(value)` applied at interior nodes only.
    pub fn map_interior(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for &k in self.grid.interior_nodes() {
            out.values[k] = f(self.values[k]);
        }
        out
    }

    pub fn min_interior(&self) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&k| self.values[k])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_interior(&self) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&k| self.values[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&k| self.values[k].abs())
            .fold(0.0, f64::max)
    }

    /// Max-norm difference over interior nodes.
    pub fn max_diff_interior(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other, "max_diff_interior")?;
        Ok(self
            .grid
            .interior_nodes()
            .iter()
            .map(|&k| (self.values[k] - other.values[k]).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &ScalarField, op: &'static str) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch { op })
        }
    }

    /// All active values finite; solution candidates additionally nonnegative.
    pub fn validate(&self, require_nonnegative: bool) -> Result<()> {
        for k in 0..self.grid.num_nodes() {
            if !self.grid.is_active(k) {
                continue;
            }
            let v = self.values[k];
            let (i, j) = self.grid.ij(k);
            if !v.is_finite() {
                return Err(Error::Structural(format!(
                    "non-finite value {v} at node ({i},{j})"
                )));
            }
            if require_nonnegative && v < 0.0 {
                return Err(Error::NonPositive {
                    what: "solution candidate",
                    value: v,
                    i,
                    j,
                });
            }
        }
        Ok(())
    }

    /// Bilinear interpolation at an arbitrary point. Returns `None` when the
    /// surrounding cell has inactive corners or the point is off the lattice.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let (x00, y00) = g.node_xy(0);
        let fx = (x - x00) / g.h;
        let fy = (y - y00) / g.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let i = (fx.floor() as usize).min(g.nx() - 2);
        let j = (fy.floor() as usize).min(g.ny() - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let k = g.flat(i, j);
        let corners = [k, k + 1, k + g.nx(), k + g.nx() + 1];
        if corners.iter().any(|&c| !g.is_active(c)) {
            return None;
        }
        let [v00, v10, v01, v11] = corners.map(|c| self.values[c]);
        Some(
            v00 * (1.0 - tx) * (1.0 - ty)
                + v10 * tx * (1.0 - ty)
                + v01 * (1.0 - tx) * ty
                + v11 * tx * ty,
        )
    }
}

/// Per-node gradient components (dimensionless slopes).
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid2D>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        VectorField {
            grid: grid.clone(),
            x: vec![0.0; grid.num_nodes()],
            y: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn norm(&self, k: usize) -> f64 {
        self.x[k].hypot(self.y[k])
    }

    pub fn max_norm_interior(&self) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&k| self.norm(k))
            .fold(0.0, f64::max)
    }
}

/// Pointwise graph geometry of `u`: area element, unit normal, tangential
/// metric, mean curvature, and squared second fundamental form.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    grid: Arc<Grid2D>,
    /// `v = sqrt(1 + |Du|^2)` at active nodes.
    pub v: Vec<f64>,
    /// Components of the upward unit normal `(nu_1, nu_2, nu_3) = (-Du, 1)/v`.
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    /// Upper metric `g^{ij} = delta_ij - nu_i nu_j` over the base indices.
    pub g11: Vec<f64>,
    pub g12: Vec<f64>,
    pub g22: Vec<f64>,
    /// Mean curvature (divergence-form stencil), interior nodes.
    pub h_mean: Vec<f64>,
    /// `|A|^2`, interior nodes.
    pub a_norm_sq: Vec<f64>,
    /// Max over interior of `|H - (m-1) nu_3 / u|`; `None` when skipped
    /// because `u <= 0` somewhere.
    pub mean_curvature_identity_gap: Option<f64>,
    /// True when the identity comparison was skipped.
    pub identity_skipped: bool,
}

impl GraphGeometry {
    pub(crate) fn new(grid: &Arc<Grid2D>) -> Self {
        let n = grid.num_nodes();
        GraphGeometry {
            grid: grid.clone(),
            v: vec![0.0; n],
            nu1: vec![0.0; n],
            nu2: vec![0.0; n],
            nu3: vec![0.0; n],
            g11: vec![0.0; n],
            g12: vec![0.0; n],
            g22: vec![0.0; n],
            h_mean: vec![0.0; n],
            a_norm_sq: vec![0.0; n],
            mean_curvature_identity_gap: None,
            identity_skipped: false,
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    /// `|nu| = 1`, `v >= 1`, `|A|^2 >= 0`, `g` positive semidefinite.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.grid.num_nodes() {
            if !self.grid.is_active(k) {
                continue;
            }
            let norm =
                (self.nu1[k].powi(2) + self.nu2[k].powi(2) + self.nu3[k].powi(2)).sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Structural(format!(
                    "unit normal has norm {norm} at node {k}"
                )));
            }
            if self.v[k] < 1.0 - 1e-12 {
                return Err(Error::Structural(format!("v < 1 at node {k}")));
            }
            // 2x2 psd check: nonnegative diagonal and determinant
            let det = self.g11[k] * self.g22[k] - self.g12[k] * self.g12[k];
            if self.g11[k] < -1e-12 || self.g22[k] < -1e-12 || det < -1e-12 {
                return Err(Error::Structural(format!(
                    "tangential metric not psd at node {k}"
                )));
            }
            if self.grid.class(k) == NodeClass::Interior && self.a_norm_sq[k] < -1e-12 {
                return Err(Error::Structural(format!("|A|^2 < 0 at node {k}")));
            }
        }
        Ok(())
    }
}
