use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The generator has no unique attracting fixed point.
    #[error("generator has no unique steady state (null space dimension {dimension})")]
    NoUniqueSteadyState { dimension: usize },

    /// The mean dipole vanishes, so there is no phase reference.
    #[error("dipole phase undefined: steady-state coherence is zero")]
    UndefinedPhase,

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// A numerical result could not be brought within its tolerance.
    #[error("accuracy error in {context}: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Accuracy {
        context: String,
        defect: f64,
        tolerance: f64,
    },

    /// Root finding could not bracket the requested target.
    #[error("no solution: target {target:.6} outside reachable range [{low:.6}, {high:.6}] ({detail})")]
    NoSolution {
        target: f64,
        low: f64,
        high: f64,
        detail: String,
    },

    #[error("cannot bin: {0}")]
    CannotBin(String),

    /// Every saved histogram failed postselection.
    #[error("postselection rejected all {0} intervals")]
    EmptyAcceptance(usize),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
