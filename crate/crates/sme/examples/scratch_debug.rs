// temporary diagnostic; removed before release
use sme::grid::{Domain, Grid2D};
use sme::params::Params;
use sme::solver::{solve_dirichlet, BoundaryData, SolveConfig};

fn main() {
    let p = Params::new(2, 2).unwrap();
    let g = Grid2D::new(Domain::annulus(0.2, 1.0), 1.0 / 32.0).unwrap();
    let cfg = SolveConfig {
        delta: 0.02,
        tol_residual: 1e-8,
        max_outer_iters: 10,
        ..Default::default()
    };
    let boundary = BoundaryData::ConeTrace {
        cx: 0.0,
        cy: 0.0,
        slope: 1.0,
    };
    let out = solve_dirichlet(&g, &boundary, &p, &cfg).unwrap();
    println!(
        "converged={} iters={} residual={:.3e} min_u={:.4} max_grad={:.3}",
        out.converged, out.outer_iters, out.final_residual, out.min_u, out.max_grad
    );
    let mut err: f64 = 0.0;
    let mut argmax = (0.0, 0.0);
    for &k in g.interior_nodes() {
        let (x, y) = g.node_xy(k);
        let e = (out.u.value(k) - x.hypot(y)).abs();
        if e > err {
            err = e;
            argmax = (x, y);
        }
    }
    println!("cone error {err:.4e} at {argmax:?}");
}
