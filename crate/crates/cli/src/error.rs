use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] disloc_core::Error),
    #[error("rejection sampling accepted {accepted} of {attempts} draws, below the 1e-4 floor")]
    RejectionOverflow { accepted: u64, attempts: u64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Core(e) => e.kind(),
            CliError::RejectionOverflow { .. } => "RejectionOverflow",
            CliError::Io(_) => "IoError",
            CliError::Csv(_) | CliError::Json(_) => "OutputError",
        }
    }

    /// The object printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
