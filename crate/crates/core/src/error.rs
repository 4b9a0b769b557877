use thiserror::Error;

/// Errors produced by the library.
///
/// The variants map onto the CLI exit codes: `Parse` → 2, `Input` and
/// `RankOutOfRange` → 3, `Logic` → 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed BMM1 input.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A caller-supplied parameter violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// An order-statistic query asked for a rank past the end of the set.
    #[error("rank {rank} out of range (only {available} qualifying elements)")]
    RankOutOfRange { rank: usize, available: usize },

    /// An internal invariant failed; always a bug or a broken promise upstream.
    #[error("internal logic error: {0}")]
    Logic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn logic(msg: impl Into<String>) -> Self {
        Error::Logic(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
