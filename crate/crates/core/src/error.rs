use thiserror::Error;

#[derive(Debug, Error)]
pub enum SraError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("distance {0} cm lies outside the grid")]
    OutOfGrid(f64),
    #[error("zero measurement cannot be processed")]
    ZeroMeasurement,
    #[error("linear program ended with status {0:?}")]
    Lp(crate::lp::LpStatus),
    #[error("reference solver failed: {0}")]
    Convergence(String),
    #[error("corrupt canonical form: reduced energy {0} exceeds 1")]
    CorruptCanonical(f64),
    #[error("grid with {0} points is too large for exhaustive search")]
    GridTooLarge(usize),
    #[error("lookup table format error: {0}")]
    Format(String),
    #[error("lookup table fingerprint mismatch")]
    Fingerprint,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SraError> = std::result::Result<T, E>;
