use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid extent: {0}")]
    InvalidExtent(String),

    #[error("invalid accuracy order: {0}")]
    InvalidOrder(String),

    #[error("no free parameters: accuracy order {order} is already maximal for this extent")]
    NoFreeParameters { order: u32 },

    #[error("singular moment system")]
    SingularSystem,

    #[error("degenerate family: normal equations are not positive definite")]
    DegenerateFamily,

    #[error("optimum is not stationary: |dE/dp| = {gradient:e} (E = {error:e})")]
    NotStationary { gradient: f64, error: f64 },

    #[error("empty integration window")]
    EmptyWindow,

    #[error("quadrature did not converge below relative change {0:e}")]
    QuadratureNotConverged(f64),

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("mismatched stencils: {0}")]
    MismatchedStencils(String),

    #[error("symbol misfit exceeds tolerance {0:e} even at the smallest sampled wavenumber")]
    Unresolved(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("instability/blowup: non-finite value at t = {time} s")]
    Instability { time: f64 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("sample times misaligned at index {0}")]
    MisalignedTimes(usize),

    #[error("snapshots do not match: {0}")]
    SnapshotMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
