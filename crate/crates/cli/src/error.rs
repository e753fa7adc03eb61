use std::fmt;

/// CLI-level error, carrying the process exit code: 2 for configuration
/// problems, 3 for numerical nonconvergence.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::NonConvergence(_) => "nonconvergence",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Config(msg) | Self::NonConvergence(msg) => msg,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

impl From<seqlab_core::Error> for CliError {
    fn from(err: seqlab_core::Error) -> Self {
        match &err {
            seqlab_core::Error::NonConvergence(_) | seqlab_core::Error::GridTooCoarse(_) => {
                Self::NonConvergence(err.to_string())
            }
            _ => Self::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::Config(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self::Config(format!("json: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
