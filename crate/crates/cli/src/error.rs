use serde::Serialize;

use ancilla_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        }
    }

    /// One-line JSON record for stderr and `error.json`.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        // Input that fails validation is a configuration problem; everything
        // else arises while computing.
        let kind = match e {
            CoreError::InvalidParameter(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::NotSquare { .. }
            | CoreError::NotQubitRegister(_)
            | CoreError::RegisterTooLarge(_)
            | CoreError::QubitOutOfRange { .. }
            | CoreError::DuplicateQubit(_)
            | CoreError::NotHermitian(_)
            | CoreError::NotUnitary(_)
            | CoreError::NotIdempotent(_)
            | CoreError::NotDiagonal(_)
            | CoreError::BadTrace { .. }
            | CoreError::NotPositive(_)
            | CoreError::RequiresNormalized
            | CoreError::LevelOutOfRange { .. } => ErrorKind::Config,
            _ => ErrorKind::Numerical,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}
