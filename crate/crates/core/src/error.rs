use std::fmt;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Stage of the global defining function construction that rejected the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionStage {
    BoundaryRepair,
    Collar,
    Blend,
    InteriorVerification,
    ScaledMembership,
}

impl fmt::Display for ConstructionStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::BoundaryRepair => "(i) boundary repair",
            Self::Collar => "(ii) collar selection",
            Self::Blend => "(iii) smooth blend",
            Self::InteriorVerification => "(iv) interior verification",
            Self::ScaledMembership => "(v) scaled membership",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("basis is not orthonormal (Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("polynomial has degree 0")]
    ConstantPolynomial,

    #[error("polynomial is not hyperbolic: {found} distinct real roots, expected {expected}")]
    NotHyperbolic { found: usize, expected: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate set: edge threshold bracket exceeded {bound:e}")]
    DegenerateSet { bound: f64 },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("set list is empty")]
    EmptySetList,

    #[error("sampler exhausted: {0}")]
    SamplerExhausted(String),

    #[error("boundary projection did not converge from {start:?} (|rho| = {residual:e})")]
    ProjectionFailed { start: Vec<f64>, residual: f64 },

    #[error("gradient of the defining function vanishes at {point:?}")]
    VanishingGradient { point: Vec<f64> },

    #[error("construction failed at stage {stage}: worst sample {point:?} (value {value:e})")]
    ConstructionFailed {
        stage: ConstructionStage,
        point: Vec<f64>,
        value: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("lattice point {index:?} has no full stencil")]
    StencilOutOfBounds { index: Vec<usize> },

    #[error("invalid configuration at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("solve did not converge: {0}")]
    SolveFailed(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
