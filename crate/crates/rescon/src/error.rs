use thiserror::Error;

/// Errors produced by system construction, pulse synthesis and the control
/// solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments or a violated precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A system archive could not be parsed or failed validation.
    #[error("archive error: {0}")]
    Archive(String),

    /// The kernel at the reference time is too ill-conditioned for a reliable
    /// relative-control solve.
    #[error(
        "ill-conditioned kernel: condition estimate {cond:.3e} exceeds threshold {threshold:.3e}"
    )]
    IllConditioned { cond: f64, threshold: f64 },

    /// The spectral basis matrix is singular or numerically close to it.
    #[error("singular basis matrix: condition estimate {cond:.3e}")]
    SingularBasis { cond: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::SingularBasis { .. }
        )
    }
}
