use thiserror::Error;

/// Errors produced by the analysis, solver and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("collision budget conversion gives {value}, which is not a probability")]
    InfeasibleBudget { value: f64 },

    #[error("geometric tail does not converge: eigenvalues {upper} and {lower} must lie in (-1, 1)")]
    TailDivergence { upper: f64, lower: f64 },

    #[error("lambert W is undefined for x = {0} < -1/e")]
    LambertDomain(f64),

    #[error("lambert W iteration did not converge for x = {0}")]
    LambertConvergence(f64),

    #[error("closed-form average AoI {closed_form} disagrees with series value {series}")]
    ClosedFormMismatch { closed_form: f64, series: f64 },

    #[error("threshold bracketing failed: {0}")]
    ThresholdBracket(String),

    #[error("randomization probability {0} lies outside [0, 1]")]
    MixingOutOfRange(f64),

    #[error("transmit is not allowed in a busy state (age {delta})")]
    BusyTransmit { delta: u32 },

    #[error("relative value iteration did not converge after {iterations} iterations (span {span:e})")]
    RviNonConvergence { iterations: usize, span: f64 },

    #[error("policy is not threshold-structured; non-transmitting idle ages above the first transmission: {offending:?}")]
    NotThreshold { offending: Vec<u32> },

    #[error("policy never transmits from an idle state")]
    NeverTransmits,

    #[error("stationary distribution is degenerate: {0}")]
    DegenerateChain(String),

    #[error("threshold {gamma} exceeds half of the truncation bound {delta_max}")]
    TruncationTooSmall { gamma: u32, delta_max: u32 },

    #[error("lambda bisection failed: {0}")]
    BisectionFailure(String),

    #[error("cannot parse policy `{input}`: {reason}")]
    PolicyParse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
