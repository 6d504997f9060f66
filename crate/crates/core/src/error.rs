use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{0} qubits exceeds the supported maximum of {1}")]
    TooManyQubits(usize, usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid instruction: {0}")]
    InvalidInstruction(String),
    /// A free-evolution override that the hardware tunability flags forbid.
    #[error("tunability constraint violated: {0}")]
    Constraint(String),
    #[error("cannot synthesize {target}: {reason}")]
    Unsupported { target: String, reason: String },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn unsupported(target: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Unsupported {
            target: target.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by backend capability or tunability limits.
    pub fn is_constraint(&self) -> bool {
        matches!(self, Error::Constraint(_) | Error::Unsupported { .. })
    }

    /// True for numerical failures (non-Hermitian input, degenerate fits).
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NotHermitian { .. } | Error::DegenerateFit(_))
    }
}
