use thiserror::Error;

/// Errors raised by the spectral calculus and the problem/iteration layers.
///
/// Mode indices are 1-based flat positions in the sorted spectrum.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vectors belong to different spectrum models")]
    ModelMismatch,

    #[error("expected {expected} coefficients, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },

    #[error("spectral function is not finite at mode {mode} (lambda = {eigenvalue})")]
    Evaluation { mode: usize, eigenvalue: f64 },

    #[error("per-mode factor exceeds {limit:e} at modes {modes:?}")]
    Overflow { modes: Vec<usize>, limit: f64 },

    #[error("resonance at mode {mode}: |sin(lambda T)| = {sine:e} for lambda = {eigenvalue}")]
    Resonance {
        mode: usize,
        eigenvalue: f64,
        sine: f64,
    },

    #[error("1 - F vanishes at mode {mode}; the fixed point is undefined there")]
    DegenerateComplement { mode: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the numerics (overflow, resonance, singular modes)
    /// rather than by malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Evaluation { .. }
                | Error::Overflow { .. }
                | Error::Resonance { .. }
                | Error::DegenerateComplement { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
