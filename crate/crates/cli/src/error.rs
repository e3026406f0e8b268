use std::fmt;
use std::path::Path;

use unemp::Error as CoreError;

/// Failure of a command, classified by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, preset or input data.
    Config(String),
    /// Singular systems, integration blow-up, degenerate fits.
    Numerical(String),
    /// An iterative solver stopped without meeting its tolerances.
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Config(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::NonConvergence(m) => write!(f, "not converged: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) | CoreError::InvalidArgument(_) | CoreError::DataValidation { .. } => {
                CliError::Config(e.to_string())
            }
            CoreError::FitNotConverged { .. } => CliError::NonConvergence(e.to_string()),
            CoreError::SingularEquilibrium { .. }
            | CoreError::StepLimit { .. }
            | CoreError::BlowUp { .. }
            | CoreError::UndefinedCorrelation(_)
            | CoreError::DegenerateFit(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
