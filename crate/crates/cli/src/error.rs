use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("refused: {0}")]
    Resource(String),

    #[error("{0}")]
    Core(#[from] quench_core::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    Format(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use quench_core::Error as E;
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Format(_) => EXIT_CONFIG,
            Self::Resource(_) => EXIT_RESOURCE,
            Self::Core(e) => match e {
                E::Resource(_) => EXIT_RESOURCE,
                E::Numeric(_) | E::Estimation(_) | E::Preparation { .. } => EXIT_NUMERIC,
                E::InvalidModel(_) | E::Range(_) | E::Dimension { .. } | E::Config(_) => EXIT_CONFIG,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Format(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
