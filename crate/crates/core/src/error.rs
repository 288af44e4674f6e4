use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("iterate left the normal-form region at step {step} (x = {x}, y = {y})")]
    Divergence { step: usize, x: f64, y: f64 },

    #[error("iteration cap of {cap} steps reached")]
    CapReached {
        cap: usize,
        /// Global minimum of the section distance seen before the cap, if the detector was armed.
        best: Option<(usize, f64)>,
    },

    #[error("{coord} = {value} outside chart domain: {reason}")]
    Domain {
        coord: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("desingularization factor {factor} <= 0 at step {step}")]
    Desingularization { step: usize, factor: f64 },

    #[error("invariant breach at step {step}: {what}")]
    InvariantBreach { step: usize, what: String },

    #[error("reference integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("bad input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
