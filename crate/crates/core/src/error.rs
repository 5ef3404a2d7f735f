use thiserror::Error;

/// Errors raised by the scattering, synthesis and inversion routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sample {index} is inadmissible (|Q| = {magnitude:.3e}, must be < 1)")]
    Inadmissible { index: usize, magnitude: f64 },

    #[error("singular layer at index {index}")]
    SingularLayer { index: usize },

    #[error("degenerate pivot while peeling layer {layer}")]
    DegeneratePivot { layer: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("evaluation point coincides with a pole (zeta* of bound state {index})")]
    Pole { index: usize },

    #[error("Darboux fold {fold} blew up")]
    BlowUp { fold: usize },

    #[error("overflow while evaluating {0}")]
    Overflow(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("target not achievable: {0}")]
    NotAchievable(String),

    #[error("{0} is not implemented")]
    NotImplemented(&'static str),
}

impl Error {
    /// True for failures caused by the numerics rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_)
                | Error::DimensionMismatch(_)
                | Error::NotImplemented(_)
                | Error::Inadmissible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
