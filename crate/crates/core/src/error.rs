use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A register, scheme or image dimension is outside the supported range.
    #[error("size error: {0}")]
    Size(String),

    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    Index { qubit: usize, num_qubits: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// The register is no longer normalized within the runtime tolerance.
    #[error("state corruption: squared norm {norm_sqr} deviates from 1")]
    StateCorruption { norm_sqr: f64 },

    /// Malformed input data. `at` names the offending field or byte offset.
    #[error("format error at {at}: {reason}")]
    Format { at: String, reason: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("incomplete shares: have {have} of {need} participants; recovery refuses to guess")]
    IncompleteShares { have: usize, need: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(at: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            at: at.into(),
            reason: reason.into(),
        }
    }
}
