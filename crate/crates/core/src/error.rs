use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation left the representable range (e.g. `e^{by}` overflow).
    #[error("domain error at y = {y}: {reason}")]
    Domain { y: f64, reason: String },

    /// No optimizer start reached a usable optimum.
    #[error("fit failed ({model}): {diagnostics}")]
    Fit { model: &'static str, diagnostics: String },

    /// Information matrix or selection quantity is not usable.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Input data rejected while parsing.
    #[error("data error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Data { row: Option<usize>, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn data(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Data { row, message: message.into() }
    }

    /// Whether the failure came from the input rather than the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Data { .. } | Error::Config(_) | Error::InvalidArgument(_))
    }
}
