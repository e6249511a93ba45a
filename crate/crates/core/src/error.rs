use thiserror::Error;

/// Errors raised by the library. Semantic verification failures are not
/// errors; they are reported through [`crate::hypergraph::VerifyReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Param(String),

    #[error("out of window: {0}")]
    OutOfWindow(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("size guard exceeded: {0}")]
    Size(String),

    #[error("node budget of {budget} exhausted during {what}")]
    Budget { what: &'static str, budget: u64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("no success up to window {max_window}: {last}")]
    WindowExhausted { max_window: u32, last: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
