use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or arguments; exit status 2.
    #[error("{0}")]
    Usage(String),

    /// Pipeline configuration rejected before execution; exit status 2.
    #[error("invalid pipeline config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] tailkit_core::Error),

    #[error("step {index} ({op}): {source}")]
    Step {
        index: usize,
        op: String,
        source: Box<CliError>,
    },
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Machine-readable error body written to stderr.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub error: String,
    pub code: String,
    pub step: Option<usize>,
}

impl CliError {
    pub fn code(&self) -> &str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(e) => e.code(),
            CliError::Step { source, .. } => source.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(_) => 1,
            CliError::Step { source, .. } => source.exit_code(),
        }
    }

    pub fn envelope(&self) -> Envelope {
        Envelope {
            error: self.to_string(),
            code: self.code().to_string(),
            step: match self {
                CliError::Step { index, .. } => Some(*index),
                _ => None,
            },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}
