use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("regularizer order must be even and >= 2, got {0}")]
    InvalidOrder(u32),

    #[error("plan infeasible: {0}")]
    PlanInfeasible(String),

    /// A shifted solve failed at the given node.
    #[error("shifted solve failed at z = {z}: {reason}")]
    Solver { z: Complex64, reason: String },

    /// The assembled sum carries an imaginary part above tolerance.
    #[error("conjugate symmetry broken: imaginary part {imag:.3e} exceeds {limit:.3e}")]
    Symmetry { imag: f64, limit: f64 },

    #[error("sample set incomplete: {0}")]
    Samples(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("decode error: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }
}
