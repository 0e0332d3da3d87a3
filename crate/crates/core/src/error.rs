use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point was outside the set where a formula or map is defined.
    #[error("point ({x}, {y}) is outside the domain of definition: {reason}")]
    OutOfDomain { x: f64, y: f64, reason: String },

    /// A query point is inside a region where the requested quantity is not defined,
    /// e.g. a distance query for an exterior point or a classification outside a chart.
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The boundary description is inconsistent (open loop, bad corner angle, ...).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A regularity tag forbids the requested derivative information.
    #[error("regularity violation: {0}")]
    Regularity(String),

    /// A finite-difference stencil left the domain of the evaluated function.
    #[error("finite-difference stencil at ({x}, {y}) with spacing {h} leaves the domain")]
    StencilInvalid { x: f64, y: f64, h: f64 },

    #[error("discretization failed: {0}")]
    Discretization(String),

    #[error("grid of {nodes} nodes needs {bytes} bytes, above the cap of {cap} bytes")]
    MemoryCap { nodes: usize, bytes: usize, cap: usize },

    #[error("newton iteration did not converge: {iterations} iterations, residual {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// The discrete boundary-data sequence violated monotonicity or failed to settle.
    #[error("boundary sequence failure: {0}")]
    Sequence(String),

    #[error("not enough usable samples: {found} found, {needed} needed")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn out_of_domain(p: crate::Point2, reason: impl Into<String>) -> Self {
        Error::OutOfDomain { x: p.x, y: p.y, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
