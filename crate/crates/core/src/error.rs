use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bracket [{lo}, {hi}] does not straddle a sign change")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// A digit decision landed inside the accumulated error bound of a digit boundary.
    #[error("precision exhausted at digit position {position} (error bound {error_bound:e})")]
    PrecisionExhausted { position: i32, error_bound: f64 },

    #[error("horizon too short: need {needed} digits of the expansion of unity, have {available}")]
    HorizonTooShort { needed: usize, available: usize },

    #[error("switching signal ends with {0} unterminated decrement(s)")]
    IncompleteBlock(usize),

    #[error("step budget of {0} reduction steps exhausted")]
    StepBudgetExhausted(usize),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
