use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("state has {got} components, controller expects {expected}")]
    StateDimension { expected: usize, got: usize },

    #[error("state component {index} is not finite")]
    NonFiniteState { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction failed: {0}")]
    Construction(String),

    /// An identity that holds for every admissible input failed; indicates a
    /// bug rather than bad input.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(
        "root solve did not converge after {iterations} iterations (bracket [{lo:e}, {hi:e}])"
    )]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("no sign change found for the implicit equation (state norm {state_norm:e})")]
    NoBracket { state_norm: f64 },

    #[error("step size underflow at t = {t} with theta = {theta:e}")]
    StepUnderflow { t: f64, theta: f64, state: Vec<f64> },

    #[error("step budget of {max_steps} exhausted at t = {t} with theta = {theta:e}")]
    StepBudget {
        max_steps: usize,
        t: f64,
        theta: f64,
    },

    #[error("time {t} is outside [0, {theta0}) for the closed-form trajectory")]
    Domain { t: f64, theta0: f64 },

    #[error("spec file: {0}")]
    SpecFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
