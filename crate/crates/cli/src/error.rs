use thiserror::Error;
use yule_core::moments::MomentError;
use yule_core::montecarlo::SimError;
use yule_core::mgf::ProcessError;

/// Errors surfaced by the command line, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or parameters.
    #[error("usage error: {0}")]
    Usage(String),
    /// Quadrature or another numerical route failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// `verify` found a deviation above its threshold.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed manifest: {0}")]
    Manifest(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) | CliError::Manifest(_) => 1,
        }
    }
}

impl From<ProcessError> for CliError {
    fn from(e: ProcessError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::UnsupportedOrder(_) | MomentError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            MomentError::NotConverged { .. } | MomentError::Mgf(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Degenerate { .. } => CliError::Numerical(e.to_string()),
            SimError::InvalidConfig(_) | SimError::InvalidOrder(_) => CliError::Usage(e.to_string()),
        }
    }
}
