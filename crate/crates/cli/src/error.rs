use kepler_geom::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for anything the caller got wrong, 3 for numerical domain failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Geom(GeomError::Config(_)) => 2,
            CliError::Geom(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
