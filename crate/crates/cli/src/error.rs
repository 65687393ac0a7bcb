use sparse_eit::EitError;
use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ITERATION_CAP: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] EitError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {what}: {message}")]
    Output { what: &'static str, message: String },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Core(e) => match e {
                EitError::SolverDiverged { .. } => EXIT_SOLVER,
                EitError::Io(_) => EXIT_FAILURE,
                _ => EXIT_CONFIG,
            },
            CliError::Io { .. } | CliError::Output { .. } => EXIT_FAILURE,
        }
    }
}
