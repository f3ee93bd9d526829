use hitsndiffs::Error;
use serde::Serialize;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DISCONNECTED: i32 = 4;
pub const EXIT_MISSING_KEY: i32 = 5;
pub const EXIT_DIMENSION: i32 = 6;

/// A failed command, printed as one JSON line on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub error: &'static str,
    pub exit: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_sizes: Option<Vec<usize>>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self::plain("usage", EXIT_USAGE, message)
    }

    pub fn dimension(expected: usize, actual: usize) -> Self {
        Self::from(Error::DimensionMismatch { expected, actual })
    }

    pub fn plain(error: &'static str, exit: i32, message: impl Into<String>) -> Self {
        Self {
            error,
            exit,
            message: message.into(),
            component_sizes: None,
        }
    }

    pub fn line(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{{\"exit\":{}}}", self.exit))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Io(_) => Self::plain("io", EXIT_IO, message),
            Error::Parse(_) | Error::EmptyInput | Error::DuplicateAnswer { .. } => {
                Self::plain("input", EXIT_IO, message)
            }
            Error::Disconnected(components) => Self {
                component_sizes: Some(components.iter().map(Vec::len).collect()),
                ..Self::plain("disconnected", EXIT_DISCONNECTED, message)
            },
            Error::MissingKey(_) | Error::InvalidKey { .. } => {
                Self::plain("missing_key", EXIT_MISSING_KEY, message)
            }
            Error::DimensionMismatch { .. } => Self::plain("dimension_mismatch", EXIT_DIMENSION, message),
            Error::ConfigInvalid(_) | Error::UnknownMethod(_) | Error::BetaTooSmall { .. } => {
                Self::plain("usage", EXIT_USAGE, message)
            }
            _ => Self::plain("failed", EXIT_FAILURE, message),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::from(Error::from(e))
    }
}
