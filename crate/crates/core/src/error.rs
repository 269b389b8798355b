use thiserror::Error;

use crate::map::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("map failed validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),

    #[error("point {0} is outside [0,1)")]
    OutOfDomain(String),

    #[error("arithmetic budget exceeded in {context}: {bits} bits > {budget}")]
    ArithmeticBudgetExceeded { context: String, bits: u64, budget: u64 },

    #[error("periodic point {0} is degenerate and has no trapping interval")]
    DegenerateOwner(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("gap layer {layer} of F_{gap} contains breakpoint {breakpoint}")]
    LayerHitBreakpoint { gap: usize, layer: usize, breakpoint: String },

    #[error("orbit of {0} reached the step budget without hitting a breakpoint")]
    BetaHitNotFound(String),

    #[error("enclosure resolution exceeded: {0}")]
    ResolutionExceeded(String),

    #[error("a chain needs at least one pair")]
    EmptyChain,

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("field is not strictly inward at boundary parameter {0}")]
    NotInward(String),

    #[error("ray from boundary parameter {0} lands exactly on a vertex")]
    CornerHit(String),

    #[error("return map is not injective: {0}")]
    NonInjective(String),

    #[error("edge lengths are incommensurable: {0}")]
    IncommensurableEdges(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("map generation failed after {0} attempts")]
    GenerationFailed(usize),

    #[error("parse error: {0}")]
    Parse(String),
}
