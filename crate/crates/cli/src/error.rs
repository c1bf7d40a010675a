use std::fmt;

use rfsqueeze_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_EMPTY_ACCEPTANCE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Every problem found in the configuration.
    Config(Vec<String>),
    Core(CoreError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Core(e) => match e {
                CoreError::InvalidInput(_) | CoreError::NoSolution { .. } | CoreError::UndefinedPhase => EXIT_CONFIG,
                CoreError::Accuracy { .. }
                | CoreError::NoUniqueSteadyState { .. }
                | CoreError::DivisionByZero(_)
                | CoreError::CannotBin(_) => EXIT_NUMERIC,
                CoreError::EmptyAcceptance(_) => EXIT_EMPTY_ACCEPTANCE,
                _ => EXIT_FAILURE,
            },
            Self::Io(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(problems) => {
                write!(f, "configuration error")?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}
