use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A hyperparameter, configuration value or call argument is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Inputs that are individually valid but do not fit together
    /// (mismatched lengths, missing predictor, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Malformed or non-finite data.
    #[error("data error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<u64>, message: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn data(line: Option<u64>, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the message with `what`, keeping the kind (and exit code).
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Error::Parameter(m) => Error::Parameter(format!("{what}: {m}")),
            Error::Input(m) => Error::Input(format!("{what}: {m}")),
            Error::Data { line, message } => Error::Data {
                line,
                message: format!("{what}: {message}"),
            },
            Error::Infeasible(m) => Error::Infeasible(format!("{what}: {m}")),
            Error::Numeric(m) => Error::Numeric(format!("{what}: {m}")),
            io @ Error::Io { .. } => io,
        }
    }

    /// Process exit code used by the `dr-bench` binary.
    ///
    /// 2 = configuration/validation, 3 = data, 4 = numeric/solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Input(_) => 2,
            Error::Data { .. } | Error::Io { .. } => 3,
            Error::Infeasible(_) | Error::Numeric(_) => 4,
        }
    }
}
