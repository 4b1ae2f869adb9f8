use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or unreadable configuration (exit 2).
    Config { path: String, message: String },
    /// A library computation failed (exit 3).
    Numeric(lenscope::Error),
    /// A route comparison exceeded its tolerance (exit 3).
    Disagreement(String),
    /// Output could not be written (exit 4).
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric(_) | CliError::Disagreement(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, message } if path.is_empty() || path == "." => {
                write!(f, "config error: {message}")
            }
            CliError::Config { path, message } => write!(f, "config error at `{path}`: {message}"),
            CliError::Numeric(e) => write!(f, "numeric error: {e}"),
            CliError::Disagreement(m) => write!(f, "route disagreement: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lenscope::Error> for CliError {
    fn from(e: lenscope::Error) -> Self {
        CliError::Numeric(e)
    }
}
