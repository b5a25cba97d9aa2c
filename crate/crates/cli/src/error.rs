use std::fmt;

use flowcast::FlowError;

/// A failure with its process exit code: 1 for expected runtime failures,
/// 2 for schema and usage errors.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn failure(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code: 1, kind, message: message.into() }
    }

    pub fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code: 2, kind, message: message.into() }
    }
}

impl fmt::Display for CliError {
    /// Always a single line: `error: <kind>: <message>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        let message = message.strip_prefix(&format!("{}: ", self.kind)).unwrap_or(&message);
        write!(f, "error: {}: {}", self.kind, message)
    }
}

fn root(e: &FlowError) -> &FlowError {
    match e {
        FlowError::Context { source, .. } => root(source),
        other => other,
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        let message = e.to_string();
        match root(&e) {
            FlowError::Io { .. } => CliError::failure("io", message),
            FlowError::Json(_) | FlowError::Csv(_) | FlowError::Config(_) | FlowError::UnknownAlias(_) => {
                CliError::usage("config", message)
            }
            FlowError::FieldParse { .. } => CliError::usage("field", message),
            FlowError::InvalidGrid(_) | FlowError::InvalidArgument(_) | FlowError::DimensionMismatch { .. } => {
                CliError::usage("argument", message)
            }
            _ => CliError::failure("runtime", message),
        }
    }
}
