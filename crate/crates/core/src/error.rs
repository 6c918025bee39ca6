use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation too small: tail mass {tail:.3e} exceeds {tolerance:.1e} at N = {dim}")]
    TruncationTooSmall { dim: usize, tail: f64, tolerance: f64 },

    #[error("quadrature grid too coarse: {reason}")]
    GridTooCoarse { reason: String },

    #[error("overdamped transfer: g = {g:.6e} must exceed (kappa + gamma)/4 = {threshold:.6e}")]
    OverdampedTransfer { g: f64, threshold: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid counts: m = {m_counts}, M = {shots}")]
    InvalidCounts { m_counts: u64, shots: u64 },

    #[error("two-mode dimension {dim} exceeds the desk-scale limit {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("model breakdown: outcome probability {p:.4} is more than 5% outside [0, 1]")]
    ModelBreakdown { p: f64 },

    #[error("invalid sweep axis `{0}`")]
    InvalidAxis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
