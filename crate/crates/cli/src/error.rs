use std::fmt;

use lindblad_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed file, state or parameter. Exit code 2.
    Input { path: String, reason: String },
    /// The computation itself failed. Exit code 1.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn input(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Input { path: path.into(), reason: reason.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input { .. } => 2,
            Self::Numerical(_) | Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input { path, reason } => write!(f, "invalid input at {path}: {reason}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotConverged(_) | CoreError::RefinementExhausted { .. } => {
                Self::Numerical(e.to_string())
            }
            CoreError::InvalidParameter { name, .. } => Self::input(name, e.to_string()),
            other => Self::input("model", other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
