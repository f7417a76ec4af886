use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("{op}: fields live on different grids")]
    GridMismatch { op: &'static str },

    #[error("{what} requires positive values, found {value} at node ({i},{j})")]
    NonPositive {
        what: &'static str,
        value: f64,
        i: usize,
        j: usize,
    },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("linear solve stagnated after {iters} iterations, relative residual {residual:.3e} (history tail {history:?})")]
    LinearSolve {
        iters: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
