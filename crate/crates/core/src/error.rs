use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("negative coefficient at {line}:{column}")]
    NegativeCoefficient { line: usize, column: usize },
    #[error("unknown variable `{0}` (never defined on a left-hand side)")]
    UnknownVariable(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("system is empty")]
    EmptySystem,
    #[error("system is not clean: {0} component(s) stay zero under Kleene iteration")]
    NotClean(usize),
    #[error("divergence suspected at iteration {iteration}: {reason}")]
    DivergenceSuspected { iteration: usize, reason: String },
    #[error("singular linear system (pivot {pivot} in column {column})")]
    SingularSystem { column: usize, pivot: String },
    #[error("no real root for component {component}")]
    NoRealRoot { component: usize },
    #[error("system is not quadratic (degree {degree} in equation {equation})")]
    NotQuadratic { equation: usize, degree: u32 },
    #[error("point is outside the region R (component {component})")]
    RegionViolation { component: usize },
    #[error("system is not strongly connected ({sccs} SCCs)")]
    NotStronglyConnected { sccs: usize },
    #[error("component {0} is zero")]
    ZeroComponent(usize),
    #[error("bound must be positive: {0}")]
    NonPositiveBound(String),
    #[error("side condition unmet: {0}")]
    SideConditionUnmet(String),
    #[error("probability mass mismatch for {context}: sums to {sum}")]
    ProbabilityMassMismatch { context: String, sum: String },
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid stop rule: {0}")]
    InvalidStopRule(String),
    #[error("invalid scalar mode {0}")]
    InvalidScalar(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
