//! Uniform lattice grids over 2-D domains with cut-cell boundary handling.
//!
//! A [`Grid2D`] covers the domain's bounding box with a uniform lattice of
//! spacing `h`. Nodes strictly inside the domain are `Interior`; lattice
//! nodes outside but 8-adjacent to an interior node are `Boundary` and carry
//! Dirichlet data. For every stencil leg from an interior node to a boundary
//! node the grid precomputes the crossing point with the continuum boundary
//! (fraction `theta` along the leg), which the solver folds into its matrix
//! rows. Quadrature cells are the lattice cells with four active corners and
//! center inside the domain.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Domain descriptor: signed distance is negative inside.
#[derive(Clone)]
pub enum Domain {
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
    },
    Annulus {
        cx: f64,
        cy: f64,
        r_inner: f64,
        r_outer: f64,
    },
    Rect {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
    },
    /// General convex region given by a signed-distance callback.
    Convex {
        sdf: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        bbox: [f64; 4],
        name: String,
    },
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disk { cx, cy, r } => write!(f, "Disk(({cx},{cy}), r={r})"),
            Domain::Annulus {
                cx,
                cy,
                r_inner,
                r_outer,
            } => write!(f, "Annulus(({cx},{cy}), {r_inner}..{r_outer})"),
            Domain::Rect { x0, y0, x1, y1 } => write!(f, "Rect(({x0},{y0})..({x1},{y1}))"),
            Domain::Convex { name, bbox, .. } => write!(f, "Convex({name}, bbox={bbox:?})"),
        }
    }
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk {
            cx: 0.0,
            cy: 0.0,
            r: 1.0,
        }
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Self {
        Domain::Annulus {
            cx: 0.0,
            cy: 0.0,
            r_inner,
            r_outer,
        }
    }

    /// Signed distance to the boundary, negative inside.
    pub fn sdf(&self, x: f64, y: f64) -> f64 {
        match self {
            Domain::Disk { cx, cy, r } => ((x - cx).hypot(y - cy)) - r,
            Domain::Annulus {
                cx,
                cy,
                r_inner,
                r_outer,
            } => {
                let d = (x - cx).hypot(y - cy);
                (d - r_outer).max(r_inner - d)
            }
            Domain::Rect { x0, y0, x1, y1 } => {
                let dx = (x0 - x).max(x - x1);
                let dy = (y0 - y).max(y - y1);
                if dx > 0.0 || dy > 0.0 {
                    dx.max(0.0).hypot(dy.max(0.0))
                } else {
                    dx.max(dy)
                }
            }
            Domain::Convex { sdf, .. } => sdf(x, y),
        }
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bbox(&self) -> [f64; 4] {
        match self {
            Domain::Disk { cx, cy, r } => [cx - r, cy - r, cx + r, cy + r],
            Domain::Annulus {
                cx, cy, r_outer, ..
            } => [cx - r_outer, cy - r_outer, cx + r_outer, cy + r_outer],
            Domain::Rect { x0, y0, x1, y1 } => [*x0, *y0, *x1, *y1],
            Domain::Convex { bbox, .. } => *bbox,
        }
    }

    /// Geometrically rescaled domain `lambda * Omega`.
    pub fn scaled(&self, lambda: f64) -> Domain {
        assert!(lambda > 0.0);
        match self {
            Domain::Disk { cx, cy, r } => Domain::Disk {
                cx: cx * lambda,
                cy: cy * lambda,
                r: r * lambda,
            },
            Domain::Annulus {
                cx,
                cy,
                r_inner,
                r_outer,
            } => Domain::Annulus {
                cx: cx * lambda,
                cy: cy * lambda,
                r_inner: r_inner * lambda,
                r_outer: r_outer * lambda,
            },
            Domain::Rect { x0, y0, x1, y1 } => Domain::Rect {
                x0: x0 * lambda,
                y0: y0 * lambda,
                x1: x1 * lambda,
                y1: y1 * lambda,
            },
            Domain::Convex { sdf, bbox, name } => {
                let inner = sdf.clone();
                Domain::Convex {
                    sdf: Arc::new(move |x, y| lambda * inner(x / lambda, y / lambda)),
                    bbox: [
                        bbox[0] * lambda,
                        bbox[1] * lambda,
                        bbox[2] * lambda,
                        bbox[3] * lambda,
                    ],
                    name: format!("{name}*{lambda}"),
                }
            }
        }
    }

    /// Nearest point on the continuum boundary.
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            Domain::Disk { cx, cy, r } => project_circle(*cx, *cy, *r, x, y),
            Domain::Annulus {
                cx,
                cy,
                r_inner,
                r_outer,
            } => {
                let d = (x - cx).hypot(y - cy);
                if (d - r_inner).abs() < (d - r_outer).abs() {
                    project_circle(*cx, *cy, *r_inner, x, y)
                } else {
                    project_circle(*cx, *cy, *r_outer, x, y)
                }
            }
            Domain::Rect { x0, y0, x1, y1 } => {
                // clamp to the rectangle, then push to the nearest side
                let px = x.clamp(*x0, *x1);
                let py = y.clamp(*y0, *y1);
                if px != x || py != y {
                    return (px, py);
                }
                let dl = x - x0;
                let dr = x1 - x;
                let db = y - y0;
                let dt = y1 - y;
                let mind = dl.min(dr).min(db).min(dt);
                if mind == dl {
                    (*x0, y)
                } else if mind == dr {
                    (*x1, y)
                } else if mind == db {
                    (x, *y0)
                } else {
                    (x, *y1)
                }
            }
            Domain::Convex { sdf, .. } => {
                // two damped Newton steps along the numeric sdf gradient
                let (mut px, mut py) = (x, y);
                for _ in 0..3 {
                    let d = sdf(px, py);
                    let e = 1e-6;
                    let gx = (sdf(px + e, py) - sdf(px - e, py)) / (2.0 * e);
                    let gy = (sdf(px, py + e) - sdf(px, py - e)) / (2.0 * e);
                    let g2 = (gx * gx + gy * gy).max(1e-12);
                    px -= d * gx / g2;
                    py -= d * gy / g2;
                }
                (px, py)
            }
        }
    }

    /// Text tag used in serialized grid descriptors.
    pub fn descriptor(&self) -> String {
        match self {
            Domain::Disk { cx, cy, r } => format!("disk cx={cx} cy={cy} r={r}"),
            Domain::Annulus {
                cx,
                cy,
                r_inner,
                r_outer,
            } => format!("annulus cx={cx} cy={cy} r_inner={r_inner} r_outer={r_outer}"),
            Domain::Rect { x0, y0, x1, y1 } => format!("rect x0={x0} y0={y0} x1={x1} y1={y1}"),
            Domain::Convex { name, .. } => format!("convex name={name}"),
        }
    }
}

fn project_circle(cx: f64, cy: f64, r: f64, x: f64, y: f64) -> (f64, f64) {
    let dx = x - cx;
    let dy = y - cy;
    let d = dx.hypot(dy);
    if d < 1e-300 {
        return (cx + r, cy);
    }
    (cx + r * dx / d, cy + r * dy / d)
}

/// Node classification on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Strictly inside the domain; an unknown of the Dirichlet problem.
    Interior,
    /// Outside the domain but 8-adjacent to an interior node; carries
    /// attached Dirichlet data.
    Boundary,
    Outside,
}

/// Crossing of a stencil leg with the continuum boundary.
#[derive(Debug, Clone, Copy)]
pub struct Leg {
    /// Fraction of the leg from the interior node to the crossing, in (0, 1].
    pub theta: f64,
    pub px: f64,
    pub py: f64,
}

/// The eight stencil directions, axis legs first.
pub const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

pub struct Grid2D {
    pub domain: Domain,
    pub h: f64,
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    class: Vec<NodeClass>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    /// flat node index -> rank among interior nodes (u32::MAX if not interior)
    interior_rank: Vec<u32>,
    legs: HashMap<(usize, u8), Leg>,
    boundary_proj: HashMap<usize, (f64, f64)>,
    /// flat indices of lower-left corners of quadrature cells
    cells: Vec<usize>,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Grid2D({:?}, h={}, {}x{}, {} interior, {} boundary)",
            self.domain,
            self.h,
            self.nx,
            self.ny,
            self.interior.len(),
            self.boundary.len()
        )
    }
}

impl Grid2D {
    pub fn new(domain: Domain, h: f64) -> Result<Arc<Grid2D>> {
        if !(h > 0.0) {
            return Err(Error::BadParams(format!("grid spacing must be > 0, got {h}")));
        }
        let [bx0, by0, bx1, by1] = domain.bbox();
        // anchor the lattice at integer multiples of h so that symmetric
        // domains classify symmetrically and scaled grids match node-for-node
        let x0 = h * (bx0 / h).floor() - 2.0 * h;
        let y0 = h * (by0 / h).floor() - 2.0 * h;
        let nx = ((bx1 + 2.0 * h - x0) / h).ceil() as usize + 1;
        let ny = ((by1 + 2.0 * h - y0) / h).ceil() as usize + 1;
        let n = nx * ny;

        let mut class = vec![NodeClass::Outside; n];
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (x0 + i as f64 * h, y0 + j as f64 * h);
                if domain.sdf(x, y) < -1e-12 * h.max(1.0) {
                    class[j * nx + i] = NodeClass::Interior;
                }
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if class[k] != NodeClass::Outside {
                    continue;
                }
                let adjacent_interior = DIRS.iter().any(|&(di, dj)| {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    ii >= 0
                        && jj >= 0
                        && (ii as usize) < nx
                        && (jj as usize) < ny
                        && class[jj as usize * nx + ii as usize] == NodeClass::Interior
                });
                if adjacent_interior {
                    class[k] = NodeClass::Boundary;
                }
            }
        }

        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut interior_rank = vec![u32::MAX; n];
        for (k, c) in class.iter().enumerate() {
            match c {
                NodeClass::Interior => {
                    interior_rank[k] = interior.len() as u32;
                    interior.push(k);
                }
                NodeClass::Boundary => boundary.push(k),
                NodeClass::Outside => {}
            }
        }
        if interior.is_empty() {
            return Err(Error::Structural(format!(
                "no interior nodes at h={h} for {domain:?}"
            )));
        }

        let mut legs = HashMap::new();
        for &k in &interior {
            let (i, j) = (k % nx, k / nx);
            let (x, y) = (x0 + i as f64 * h, y0 + j as f64 * h);
            for (d, &(di, dj)) in DIRS.iter().enumerate() {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii < 0 || jj < 0 || ii as usize >= nx || jj as usize >= ny {
                    continue;
                }
                let kq = jj as usize * nx + ii as usize;
                if class[kq] != NodeClass::Boundary {
                    continue;
                }
                let (qx, qy) = (x0 + ii as f64 * h, y0 + jj as f64 * h);
                let theta = crossing_fraction(&domain, x, y, qx, qy);
                legs.insert(
                    (k, d as u8),
                    Leg {
                        theta,
                        px: x + theta * (qx - x),
                        py: y + theta * (qy - y),
                    },
                );
            }
        }

        let mut boundary_proj = HashMap::new();
        for &k in &boundary {
            let (i, j) = (k % nx, k / nx);
            let (x, y) = (x0 + i as f64 * h, y0 + j as f64 * h);
            boundary_proj.insert(k, domain.project(x, y));
        }

        let mut cells = Vec::new();
        for j in 0..ny.saturating_sub(1) {
            for i in 0..nx.saturating_sub(1) {
                let k = j * nx + i;
                let corners = [k, k + 1, k + nx, k + nx + 1];
                if corners.iter().all(|&c| class[c] != NodeClass::Outside) {
                    let (cx, cy) = (x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h);
                    if domain.sdf(cx, cy) < 0.0 {
                        cells.push(k);
                    }
                }
            }
        }

        let grid = Grid2D {
            domain,
            h,
            nx,
            ny,
            x0,
            y0,
            class,
            interior,
            boundary,
            interior_rank,
            legs,
            boundary_proj,
            cells,
        };
        grid.validate()?;
        Ok(Arc::new(grid))
    }

    /// Check the structural invariants: full active one-ring around every
    /// interior node, and boundary nodes close to the continuum boundary.
    fn validate(&self) -> Result<()> {
        let diag = std::f64::consts::SQRT_2 * self.h;
        for &k in &self.interior {
            let (i, j) = self.ij(k);
            for &(di, dj) in &DIRS {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii < 0 || jj < 0 || ii as usize >= self.nx || jj as usize >= self.ny {
                    return Err(Error::Structural(format!(
                        "interior node ({i},{j}) has a one-ring neighbor off the lattice"
                    )));
                }
                if self.class[jj as usize * self.nx + ii as usize] == NodeClass::Outside {
                    return Err(Error::Structural(format!(
                        "interior node ({i},{j}) is missing an active one-ring neighbor"
                    )));
                }
            }
        }
        for &k in &self.boundary {
            let (x, y) = self.node_xy(k);
            let d = self.domain.sdf(x, y);
            if d > diag * (1.0 + 1e-9) {
                return Err(Error::Structural(format!(
                    "boundary node at ({x},{y}) lies {d} from the boundary (> sqrt(2) h)"
                )));
            }
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn flat(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node_xy(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn class(&self, k: usize) -> NodeClass {
        self.class[k]
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.class[k] != NodeClass::Outside
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_rank(&self, k: usize) -> Option<usize> {
        let r = self.interior_rank[k];
        (r != u32::MAX).then_some(r as usize)
    }

    /// Flat index of the neighbor of `k` in direction `d` (index into [`DIRS`]),
    /// if it is on the lattice.
    pub fn neighbor(&self, k: usize, d: usize) -> Option<usize> {
        let (i, j) = self.ij(k);
        let (di, dj) = DIRS[d];
        let (ii, jj) = (i as i64 + di, j as i64 + dj);
        if ii < 0 || jj < 0 || ii as usize >= self.nx || jj as usize >= self.ny {
            None
        } else {
            Some(jj as usize * self.nx + ii as usize)
        }
    }

    /// Boundary-crossing data for the leg from interior node `k` in direction `d`.
    pub fn leg(&self, k: usize, d: usize) -> Option<&Leg> {
        self.legs.get(&(k, d as u8))
    }

    /// Nearest continuum-boundary point of a boundary node.
    pub fn boundary_projection(&self, k: usize) -> Option<(f64, f64)> {
        self.boundary_proj.get(&k).copied()
    }

    /// Lower-left corner indices of the quadrature cells.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Largest inscribed-circle radius seen from the interior lattice.
    pub fn inradius(&self) -> f64 {
        self.interior
            .iter()
            .map(|&k| {
                let (x, y) = self.node_xy(k);
                -self.domain.sdf(x, y)
            })
            .fold(0.0, f64::max)
    }

    /// Structured text block describing the grid (domain kind, parameters, h).
    pub fn descriptor(&self) -> String {
        format!("domain: {}\nh: {}\n", self.domain.descriptor(), self.h)
    }

    pub fn same_layout(&self, other: &Grid2D) -> bool {
        std::ptr::eq(self, other)
            || (self.h == other.h
                && self.nx == other.nx
                && self.ny == other.ny
                && self.x0 == other.x0
                && self.y0 == other.y0
                && self.class == other.class)
    }
}

/// Fraction along the segment inside->outside where the sdf changes sign.
fn crossing_fraction(domain: &Domain, x: f64, y: f64, qx: f64, qy: f64) -> f64 {
    let f = |t: f64| domain.sdf(x + t * (qx - x), y + t * (qy - y));
    if f(1.0) <= 0.0 {
        return 1.0; // boundary node sits on (or numerically inside) the boundary
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_classification() {
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 16.0).unwrap();
        let n_int = g.interior_nodes().len() as f64;
        // interior node count approximates area pi / h^2
        let expect = std::f64::consts::PI / (g.h * g.h);
        assert!((n_int - expect).abs() / expect < 0.05, "{n_int} vs {expect}");
        // origin is a lattice node and interior
        let found = g
            .interior_nodes()
            .iter()
            .any(|&k| {
                let (x, y) = g.node_xy(k);
                x.abs() < 1e-12 && y.abs() < 1e-12
            });
        assert!(found);
    }

    #[test]
    fn annulus_has_hole() {
        let g = Grid2D::new(Domain::annulus(0.2, 1.0), 1.0 / 32.0).unwrap();
        for &k in g.interior_nodes() {
            let (x, y) = g.node_xy(k);
            let r = x.hypot(y);
            assert!(r > 0.2 && r < 1.0);
        }
        // nodes inside the hole adjacent to the annulus are boundary nodes
        assert!(g.boundary_nodes().iter().any(|&k| {
            let (x, y) = g.node_xy(k);
            x.hypot(y) < 0.2 + 1e-9
        }));
    }

    #[test]
    fn rect_aligns_to_lattice() {
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
        // interior nodes are the (N-1)^2 strictly inside nodes
        assert_eq!(g.interior_nodes().len(), 7 * 7);
        // all legs hit the boundary exactly at the neighbor
        for &k in g.interior_nodes() {
            for d in 0..8 {
                if let Some(leg) = g.leg(k, d) {
                    assert!((leg.theta - 1.0).abs() < 1e-12);
                }
            }
        }
        // quadrature cells tile the unit square exactly
        let area = g.cells().len() as f64 * g.h * g.h;
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn legs_cross_the_boundary() {
        let g = Grid2D::new(Domain::unit_disk(), 1.0 / 16.0).unwrap();
        let mut count = 0;
        for &k in g.interior_nodes() {
            for d in 0..8 {
                if let Some(leg) = g.leg(k, d) {
                    count += 1;
                    assert!(leg.theta > 0.0 && leg.theta <= 1.0);
                    let r = leg.px.hypot(leg.py);
                    assert!((r - 1.0).abs() < 1e-9, "crossing off the circle: {r}");
                }
            }
        }
        assert!(count > 0);
    }

    #[test]
    fn scaled_grid_matches_node_for_node() {
        let g = Grid2D::new(Domain::annulus(0.2, 1.0), 1.0 / 16.0).unwrap();
        let lam = 2.0;
        let gs = Grid2D::new(g.domain.scaled(lam), g.h * lam).unwrap();
        assert_eq!(g.interior_nodes().len(), gs.interior_nodes().len());
        for (&a, &b) in g.interior_nodes().iter().zip(gs.interior_nodes()) {
            let (xa, ya) = g.node_xy(a);
            let (xb, yb) = gs.node_xy(b);
            assert!((xb - lam * xa).abs() < 1e-12 && (yb - lam * ya).abs() < 1e-12);
        }
    }
}
