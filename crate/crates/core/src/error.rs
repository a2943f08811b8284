use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature on [{lo}, {hi}] did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("existence condition not satisfied ({verdict}); {detail}")]
    ConditionNotSatisfied { verdict: String, detail: String },

    #[error("lambda {lambda} is below lambda0 = {lambda0}; the estimate is only asserted for lambda >= lambda0")]
    LambdaBelowThreshold { lambda: f64, lambda0: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("grid precondition violated: {0}")]
    Grid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
