use std::path::{Path, PathBuf};

use procrustes::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const DIM: i32 = 3;
    pub const PSD: i32 = 4;
    pub const KERNEL: i32 = 5;
    pub const MAX_ITER: i32 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}{}", .path.display(), fmt_at(*.line, *.column))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_at(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" (line {l}, column {c})"),
        (Some(l), None) => format!(" (line {l})"),
        _ => String::new(),
    }
}

impl CliError {
    pub fn parse(path: &Path, line: Option<usize>, column: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) | CliError::Io { .. } => exit::PARSE,
            CliError::Core { source, .. } => core_code(source),
        }
    }
}

pub fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::NonFinite { .. }
        | CoreError::OutOfRange { .. }
        | CoreError::EmptyFamily
        | CoreError::Degenerate(_) => exit::PARSE,
        CoreError::DimMismatch { .. } => exit::DIM,
        CoreError::NotPsd { .. } | CoreError::LeavesCone { .. } => exit::PSD,
        CoreError::KernelCondition { .. } => exit::KERNEL,
        CoreError::MaxIterExceeded { .. } => exit::MAX_ITER,
    }
}

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
