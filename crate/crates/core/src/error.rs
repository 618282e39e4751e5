use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    Convergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    /// A sensor coincides with the evaluation point.
    #[error("degenerate geometry: sensor {index} coincides with the source")]
    DegenerateGeometry { index: usize },

    /// The Fisher information is singular (collinear sensors or a single sensor).
    #[error("singular geometry: det {det:e} <= threshold {threshold:e}")]
    SingularGeometry { det: f64, threshold: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("candidate ({x}, {y}) is not part of the evaluated candidate set")]
    CandidateNotFound { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}
