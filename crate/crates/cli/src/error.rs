use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ANALYSIS_ERROR: i32 = 2;
pub const EXIT_VERDICT_FAIL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or a field of the wrong type; `field` is a JSON path.
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("sampling exhausted: no model with a faithful invariant state after {attempts} attempts (model {index})")]
    SamplingExhausted { index: usize, attempts: usize },
    #[error(transparent)]
    Core(#[from] qmsdf_core::Error),
}

impl CliError {
    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Bad input (files, flags, tolerances) is a usage error; anything raised
    /// while analyzing a valid model is an analysis error.
    pub fn exit_code(&self) -> i32 {
        use qmsdf_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::ModelInvalid { .. } | E::NotAState(_) | E::InvalidTolerance { .. } | E::UnknownToleranceField(_)) => {
                EXIT_USAGE
            }
            CliError::SamplingExhausted { .. } | CliError::Core(_) => EXIT_ANALYSIS_ERROR,
        }
    }
}
