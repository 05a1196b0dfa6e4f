use kisin_core::Error as CoreError;

/// Failures of the command-line layer, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("property failure: {0}")]
    Property(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl ToolError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        ToolError::Parse { line, msg: msg.into() }
    }

    /// 0 ok, 1 usage, 2 parse, 3 precision, 4 property failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Usage(_) | ToolError::Io(_) => 1,
            ToolError::Parse { .. } => 2,
            ToolError::Core(e) => match e {
                CoreError::InsufficientPrecision(_) | CoreError::SeedPrecisionTooSmall { .. } | CoreError::NonConvergence(_) => 3,
                CoreError::FiltrationWitnessNotNested | CoreError::AmbiguousHnStep | CoreError::AmbiguousMaximizer | CoreError::Internal(_) => 4,
                _ => 1,
            },
            ToolError::Property(_) => 4,
        }
    }
}

pub type ToolResult<T> = Result<T, ToolError>;
