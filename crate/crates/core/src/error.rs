use num_complex::Complex64 as C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Marching produced a non-finite or oversized state.
    #[error("solution overflow at grid index {index} (x = {x:.6}); |λ| too large for double precision")]
    Overflow { index: usize, x: f64 },

    #[error("λ = {lambda} is within the pole guard of the Weyl-type function (|Δ₁| = {delta1:.3e})")]
    WeylPole { lambda: C64, delta1: f64 },

    #[error("eigenvalue enumeration incomplete for k = {k}: expected {expected} zeros, found {found}; suspect index {index}")]
    EnumerationIncomplete {
        k: u8,
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("coefficient extraction diverged at k = {k}: {detail}")]
    Divergence { k: usize, detail: String },

    #[error("λ = {lambda} is not a tabulated sample; table sources are never interpolated")]
    NotOnLadder { lambda: C64 },

    #[error("ill-conditioned evaluation: {0}")]
    IllConditioned(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
