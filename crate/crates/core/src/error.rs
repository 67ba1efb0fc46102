use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("size mismatch: expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("sphere grids differ between operands")]
    SphereMismatch,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("support violation: {0}")]
    Support(String),
    #[error("GMRES stalled after {iterations} iterations at relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("forward solve for source {index} failed: {source}")]
    Source {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("spectral tail {tail:.3e} above {tol:.1e} at L_max = {l_max}")]
    SpectralTail { tail: f64, tol: f64, l_max: usize },
    #[error("quadrature exact to degree {degree}, need {required}")]
    Quadrature { degree: usize, required: usize },
    #[error("xi lies on the ({j},{l}) coordinate plane")]
    DegenerateFrame { j: usize, l: usize },
    #[error("transport residual {residual:.3e} above {tol:.3e}")]
    Transport { residual: f64, tol: f64 },
    #[error("lattice: {0}")]
    Lattice(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::SpectralTail { .. }
            | Error::Transport { .. } => true,
            Error::Source { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
