use thiserror::Error;

/// Errors raised by the geometric and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is not on the boundary (level residual {residual:.3e})")]
    NotOnBoundary { residual: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("degenerate chord: length {length:.3e} is below the tangency threshold")]
    DegenerateChord { length: f64 },

    #[error("grazing incidence: angle {angle:.3e} rad with the tangent plane")]
    Grazing { angle: f64 },

    #[error("origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("second fundamental form is not positive definite (eigenvalue {eigenvalue:.3e})")]
    ConvexityViolation { eigenvalue: f64 },

    #[error("operation requires a smooth strictly convex body")]
    NonSmooth,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sample plan error: {0}")]
    Plan(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("signals are indistinguishable from round-off on the whole grid")]
    Indistinguishable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("frame normalization error: {0}")]
    FrameNormalization(String),

    #[error("line does not meet the body")]
    Miss,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
