use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0:?} lies outside the domain")]
    OutOfDomain(Vec<f64>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("symbol {symbol} is not defined for the {family} map family")]
    UnknownSymbol { family: &'static str, symbol: u8 },

    #[error("integration failed after {elapsed} time units: {reason}")]
    Integration { elapsed: f64, reason: String },

    #[error("matrices do not form a contiguous cocycle: {0}")]
    Chain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("orthogonal iteration did not converge after {sweeps} sweeps (last subspace rotation {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("{0} must not be empty")]
    EmptySet(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("threshold scan has no candidate with measure in (0, 1/2]")]
    InfeasibleScan,

    #[error("malformed input in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
