use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] erw_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("KS test needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("no critical value tabulated for alpha = {0}")]
    UnsupportedAlpha(f64),
    #[error("slope fit needs at least {min} usable points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Short machine-readable tag used in JSON error records.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(erw_core::Error::QuadratureNonConvergence { .. }) => "quadrature",
            HarnessError::Core(erw_core::Error::SeriesDivergence { .. }) => "series",
            HarnessError::Core(_) => "numerical",
            HarnessError::Config(_) => "config",
            HarnessError::EmptySample
            | HarnessError::TooFewSamples { .. }
            | HarnessError::UnsupportedAlpha(_)
            | HarnessError::TooFewPoints { .. } => "statistics",
            HarnessError::Io(_) => "io",
            HarnessError::Csv(_) => "csv",
            HarnessError::Json(_) => "json",
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
