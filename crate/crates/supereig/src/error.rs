use std::io;

use serde_json::json;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] supereig_core::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        use supereig_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Dimension { .. } => "invalid_input",
                E::Geometry(_) | E::OutsideElement(_) => "geometry",
                E::Configuration(_) => "configuration",
                E::UnsupportedKind(_) => "unsupported",
                E::NotPositiveDefinite(_) | E::NoConvergence(_) => "solver",
                E::Recovery(_) | E::DegenerateWeights | E::ZeroFunction => "postprocess",
            },
            CliError::Io(_) => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Json(_) | CliError::Csv(_) => "output",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`
    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
