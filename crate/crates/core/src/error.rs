use thiserror::Error;

pub type Result<T> = std::result::Result<T, CatkError>;

#[derive(Debug, Error)]
pub enum CatkError {
    #[error("invalid curvature {0}: must be finite and <= 0")]
    InvalidCurvature(f64),
    #[error("curvature mismatch: {0} vs {1}")]
    CurvatureMismatch(f64, f64),
    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),
    #[error("side lengths a={a}, b={b}, c={c} violate the triangle inequality")]
    InvalidSides { a: f64, b: f64, c: f64 },
    #[error("invalid gluing: {0}")]
    InvalidGluing(String),
    #[error("invalid face {face}: {reason}")]
    InvalidFace { face: u64, reason: String },
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid seam: {0}")]
    InvalidSeam(String),
    #[error("location error: {0}")]
    Location(String),
    #[error("region is empty")]
    EmptyRegion,
    #[error("point lies outside the region")]
    OutsideRegion,
    #[error("no path between the given points")]
    NoPath,
    #[error("region is not rectifiably connected between the given points")]
    NotRectifiablyConnected,
    #[error("geodesic refinement did not converge after {rounds} rounds (best length {best_length})")]
    ConvergenceFailure {
        rounds: usize,
        best_length: f64,
        best: Box<crate::geodesic::PiecewisePath>,
    },
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid triangle: {0}")]
    InvalidTriangle(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("homology: {0}")]
    Homology(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CatkError {
    /// Short machine-readable category, used in reports and by the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            CatkError::InvalidCurvature(_) | CatkError::CurvatureMismatch(..) => "curvature",
            CatkError::DegenerateTriangle(_)
            | CatkError::InvalidSides { .. }
            | CatkError::InvalidGluing(_) => "geometry",
            CatkError::InvalidFace { .. }
            | CatkError::InvalidComplex(_)
            | CatkError::InvalidSeam(_)
            | CatkError::Location(_) => "complex",
            CatkError::EmptyRegion
            | CatkError::OutsideRegion
            | CatkError::NoPath
            | CatkError::NotRectifiablyConnected => "region",
            CatkError::ConvergenceFailure { .. } => "convergence",
            CatkError::InvalidSeed(_)
            | CatkError::InvalidCurve(_)
            | CatkError::InvalidTriangle(_)
            | CatkError::Homology(_) => "homology",
            CatkError::InvalidScenario(_) => "scenario",
            CatkError::Parse(_) => "parse",
            CatkError::Io(_) => "io",
        }
    }
}
