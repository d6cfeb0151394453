use thiserror::Error;

/// Errors raised by the numerical and pipeline routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("degenerate response vector: no entry exceeds the zero threshold")]
    DegenerateResponse,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("single-class input: both labels must be present")]
    SingleClass,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("attack success rate {rate:.3} is below the minimum {min:.2}")]
    LowAttackSuccess { rate: f64, min: f64 },
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset not found: source `{source_tag}`, attack `{attack}`")]
    MissingDataset { source_tag: String, attack: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DegenerateSample(_) => "degenerate_sample",
            Error::DegenerateResponse => "degenerate_response",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingleClass => "single_class",
            Error::NonFinite(_) => "non_finite",
            Error::Empty(_) => "empty",
            Error::Precondition(_) => "precondition",
            Error::LowAttackSuccess { .. } => "low_attack_success",
            Error::InvalidConfig(_) => "invalid_config",
            Error::MissingDataset { .. } => "missing_dataset",
        }
    }
}
