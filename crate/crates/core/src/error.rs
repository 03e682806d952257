use thiserror::Error;

/// Errors raised by field evaluation, model construction, dynamics and the
/// contact-geometric checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("form degree overflow: {0} + {1} > 3")]
    DegreeOverflow(usize, usize),

    #[error("operation not defined for a form of degree {0}")]
    BadDegree(usize),

    #[error("derivative order {requested} exceeds the supported maximum {max}")]
    DerivativeOrder { requested: usize, max: usize },

    #[error("degenerate {what} at {point:?}")]
    Degenerate { what: String, point: [f64; 3] },

    #[error("vector field vanishes at {0:?}")]
    ZeroField([f64; 3]),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("frame normalization violated at {point:?}: {detail}")]
    Frame { point: [f64; 3], detail: String },

    #[error("model construction failed: {0}")]
    Model(String),

    #[error("line estimate did not converge within horizon {horizon}: last angle change {last_angle:e}")]
    NotConverged { horizon: f64, last_angle: f64 },

    #[error("orbit `{label}` does not close: gap {gap:e}")]
    OrbitNotClosed { label: String, gap: f64 },

    #[error("hypothesis failure: {0}")]
    Hypothesis(String),
}

impl Error {
    pub(crate) fn degenerate(what: impl Into<String>, p: &crate::Point) -> Self {
        Error::Degenerate {
            what: what.into(),
            point: [p.x, p.y, p.z],
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
