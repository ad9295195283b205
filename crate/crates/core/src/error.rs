use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid of {grid} points per axis aliases a lattice with cutoff {cutoff} (need at least {})", 2 * cutoff + 1)]
    Alias { grid: usize, cutoff: usize },

    #[error("only d = 1 is supported here, got d = {0}")]
    UnsupportedDimension(usize),

    #[error("density is not positive: minimum grid value {min:e}")]
    NonPositiveDensity { min: f64 },

    #[error("mode cache cutoff {cache} is below the potential support {support}")]
    Truncation { cache: usize, support: usize },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
