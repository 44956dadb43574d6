use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: qwell::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qwell::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 1,
            Self::Stage { source, .. } => match source {
                E::Convergence { .. } => 3,
                E::Bracket { .. } | E::NonMonotonic(_) | E::InvalidBasis(_) | E::Truncation { .. } => 4,
                E::Geometry(_) | E::Domain(_) | E::GridMismatch(_) | E::DegenerateState(_) | E::BasisMismatch => 2,
            },
        }
    }
}

/// Tags a core error with the pipeline stage that raised it.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageExt<T> for qwell::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

pub fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
