use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("eigensolver did not converge: worst residual {worst_residual:.3e} eV exceeds {tolerance:.3e} eV (state {state})")]
    Convergence {
        state: usize,
        worst_residual: f64,
        tolerance: f64,
    },

    #[error("initial state captures only {captured:.6} of its weight in the retained {retained} states; increase the number of states")]
    Truncation { captured: f64, retained: usize },

    #[error("states do not share a basis")]
    BasisMismatch,

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("bracket [{lo}, {hi}] eV does not straddle the target: {detail}")]
    Bracket { lo: f64, hi: f64, detail: String },

    #[error("hop period is not monotone in barrier height over the bracket: {0}")]
    NonMonotonic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
