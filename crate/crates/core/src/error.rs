use std::path::PathBuf;

/// Errors surfaced by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported QAM order {0}: expected 4, 16 or 64")]
    UnsupportedModulation(usize),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("search space of {size} vectors exceeds the oracle cap of {cap}")]
    SearchSpaceTooLarge { size: f64, cap: u64 },

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("target BER {target:e} is not bracketed by the simulated curve")]
    NotBracketed { target: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed frame record: {0}")]
    Record(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
