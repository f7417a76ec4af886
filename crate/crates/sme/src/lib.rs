//! Numerical laboratory for the symmetric minimal surface equation
//!
//! The equation prescribes the mean curvature of the graph of a positive
//! function `u` on a domain in `R^n`:
//!
//! ```text
//! sum_i D_i( D_i u / sqrt(1+|Du|^2) ) = (m-1) / (u sqrt(1+|Du|^2))
//! ```
//!
//! Its symmetric graph `{ (x, xi) : |xi| = u(x) }` is a minimal hypersurface
//! in `R^{n+m}`, and uniform limits of positive solutions that touch zero —
//! singular solutions — model singular minimal surfaces such as the Simons
//! cone (`m = n = 4`).
//!
//! The crate provides:
//!
//! - [`grid`], [`field`], [`ops`]: finite-difference fields, the
//!   divergence-form mean curvature operator, the area functional with an
//!   exact discrete gradient, and graph geometry (`v`, `nu`, `H`, `|A|^2`).
//! - [`radial`]: the `n = 1` profile family with its conserved quantity, and
//!   the exterior profile `psi` with vertical launch at `r = 1`, its
//!   rescalings, and the slope supremum `beta`.
//! - [`solver`]: Dirichlet solves on 2-D domains by damped Picard iteration
//!   of the frozen-coefficient linearization, with a positivity floor and an
//!   optional Newton polish.
//! - [`continuation`]: homotopy in boundary data between non-solvable and
//!   strongly positive data, bisection of the solvability transition, and
//!   extraction of singular-limit candidates.
//! - [`analysis`]: empirical verification of the quantitative estimates
//!   (volume bounds, Hoelder and gradient bounds, the stability inequality,
//!   blow-up probes, singular-set dimension, weak-form checks).
//! - [`cli`]: the `sme` command-line front end (`radial`, `solve`,
//!   `continue`, `verify`, `blowup`).
//!
//! Start with the runnable examples in `examples/` — one per capability.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod linsolve;
pub mod ops;
pub mod params;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};
pub use field::{GraphGeometry, ScalarField, VectorField};
pub use grid::{Domain, Grid2D, NodeClass};
pub use params::Params;
