use alloc::boxed::Box;
use alloc::string::String;

use crate::datafit::FitResult;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular equilibrium: denominator {denominator:e} is numerically zero")]
    SingularEquilibrium { denominator: f64 },

    #[error("step limit of {max_steps} exceeded at t = {t}")]
    StepLimit { max_steps: usize, t: f64 },

    #[error("integration blew up: non-finite derivative after last good time t = {last_good_t}")]
    BlowUp { last_good_t: f64 },

    #[error("data validation failed at row {row}: {message}")]
    DataValidation { row: usize, message: String },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("fit did not converge after {iterations} iterations (best w = {}, sse = {:e})", best.coefficients.w, best.sse)]
    FitNotConverged { iterations: usize, best: Box<FitResult> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
