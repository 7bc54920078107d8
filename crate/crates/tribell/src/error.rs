use std::fmt;

/// Failures mapped to process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Exit 2: a flag value failed validation.
    Config { field: String, message: String },
    /// Exit 3: a criterion does not apply to the state or setting.
    Incompatible(String),
    /// Exit 1: a verification property failed.
    PropertyFailure(String),
    /// Exit 2: output could not be written.
    Io(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Config { .. } | CliError::Io(_) => 2,
            CliError::Incompatible(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "invalid {field}: {message}"),
            CliError::Incompatible(m) => write!(f, "incompatible: {m}"),
            CliError::PropertyFailure(m) => write!(f, "property failure: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::PropertyFailure("x".into()).exit_code(), 1);
        assert_eq!(CliError::config("--seed", "x").exit_code(), 2);
        assert_eq!(CliError::Io("x".into()).exit_code(), 2);
        assert_eq!(CliError::Incompatible("x".into()).exit_code(), 3);
    }
}
