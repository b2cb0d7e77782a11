use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An environment or experiment description that cannot be built.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A caller broke an operation's precondition (index out of range,
    /// mismatched shapes, empty policy set, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no plan: {0}")]
    NoPlan(String),

    #[error("too many goals for exhaustive ordering: {count} > {limit}")]
    TooManyGoals { count: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
