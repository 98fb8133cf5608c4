use thiserror::Error;

/// Errors raised by expression parsing and evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function '{name}' at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),
    #[error("domain error ({reason}) in subexpression `{subtree}`")]
    Domain {
        reason: &'static str,
        subtree: String,
    },
}

/// Errors raised while building or evaluating geometry.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is not positive definite at chart '{chart}' point {point:?}")]
    DegenerateMetric { chart: String, point: Vec<f64> },
    #[error("point {0:?} falls outside every usable chart region")]
    NoChart(Vec<f64>),
    #[error("invalid manifold: {0}")]
    Invalid(String),
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("dimension {0} exceeds the supported maximum of {max}", max = crate::jet::MAX_DIM)]
    DimensionTooLarge(usize),
}

/// Errors raised by the operator calculus on tangent-bundle-valued forms.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalcError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degree {degree} out of range for {op}")]
    Degree { op: &'static str, degree: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("symbolic inverse requested for a non-conformal metric of dimension {0}")]
    SymbolicInverse(usize),
    #[error("expression budget exceeded: {nodes} nodes > {budget}")]
    Budget { nodes: usize, budget: usize },
    #[error("almost complex structure is not compatible with the metric (residual {0:.3e})")]
    NotCompatible(f64),
    #[error("matrix field is numerically singular (|det| = {0:.3e})")]
    Singular(f64),
    #[error("chart count mismatch: form has {form}, manifold has {manifold}")]
    ChartMismatch { form: usize, manifold: usize },
}

impl From<ExprError> for CalcError {
    fn from(e: ExprError) -> Self {
        CalcError::Geometry(GeometryError::Expr(e))
    }
}
