use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid charges: {0}")]
    InvalidCharges(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Two charged points closer than the pole radius.
    #[error("configuration is inside the pole radius (min distance {min_distance:e})")]
    Pole { min_distance: f64 },

    #[error("degenerate critical point (min |eigenvalue| {min_abs:e}, spectral radius {radius:e})")]
    Degenerate { min_abs: f64, radius: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("path error: {0}")]
    Path(String),
}

pub type Result<T> = std::result::Result<T, Error>;
