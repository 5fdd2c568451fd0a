use thiserror::Error;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i}, {j}, {l}) outside grid {nx}x{ny}x{nz}")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        l: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sixth-order scheme requires uniform spacing, got h = ({hx}, {hy}, {hz})")]
    NonUniformGrid { hx: f64, hy: f64, hz: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dense assembly limited to {limit} unknowns, grid has {size}")]
    SizeGuard { size: usize, limit: usize },

    #[error("source derivative data missing ({0}) and finite-difference fallback disabled")]
    MissingDerivatives(&'static str),

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("matrix is not numerically diagonalizable: {0}")]
    NotDiagonalizable(String),

    #[error("eigenvalue iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("GMRES breakdown with residual {residual:.3e} above tolerance")]
    Breakdown { residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
