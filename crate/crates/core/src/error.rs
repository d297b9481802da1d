use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum GrafError {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Invalid training or experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// CSV input could not be parsed at a specific location.
    #[error("{path}: row {row}, column {column}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    /// A persisted model could not be read back.
    #[error("model load error: {0}")]
    ModelLoad(String),

    /// The persisted model was written by an incompatible format version.
    #[error("incompatible model format version {found} (this build reads version {supported})")]
    IncompatibleVersion { found: u32, supported: u32 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An internal invariant was violated.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl GrafError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GrafError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class: 2 usage, 3 data, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            GrafError::Usage(_) | GrafError::Config(_) => 2,
            GrafError::Data(_)
            | GrafError::Csv { .. }
            | GrafError::ModelLoad(_)
            | GrafError::IncompatibleVersion { .. }
            | GrafError::Io { .. } => 3,
            GrafError::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, GrafError>;
