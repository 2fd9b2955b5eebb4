use serde::Serialize;

/// Failure class; each maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    Validation,
    Model,
    Solver,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage | ErrorKind::Io | ErrorKind::Parse | ErrorKind::Validation => 2,
            ErrorKind::Model => 3,
            ErrorKind::Solver => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{kind:?}: {message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            field: None,
            line: None,
            column: None,
        }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_string()),
            ..Self::new(ErrorKind::Validation, message)
        }
    }

    pub fn model(err: diffrate::Error) -> Self {
        Self::new(ErrorKind::Model, err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// Single-line JSON object for standard error.
    pub fn to_json(&self, scenario: Option<&str>) -> String {
        serde_json::json!({
            "error": self,
            "exit_code": self.exit_code(),
            "scenario": scenario,
        })
        .to_string()
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self {
            line: Some(err.line()),
            column: Some(err.column()),
            ..Self::new(ErrorKind::Parse, err.to_string())
        }
    }
}
