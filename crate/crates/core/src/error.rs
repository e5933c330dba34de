use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision exhausted: only {certified} partial quotients certified (last q = {last_q}) before reaching max_q = {max_q}")]
    PrecisionExhausted {
        certified: usize,
        last_q: u128,
        max_q: u128,
    },

    #[error("uncertified: {0}")]
    Uncertified(String),

    #[error("frequency is rational ({0}); Diophantine predicates do not apply")]
    NotIrrational(String),

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("config error at line {line}, field `{field}`: {msg}")]
    Config {
        line: usize,
        field: String,
        msg: String,
    },

    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("scenario `{scenario}` exceeded its wall-clock budget of {budget_secs} s")]
    Timeout { scenario: String, budget_secs: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(what: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            msg: msg.into(),
        }
    }
}
