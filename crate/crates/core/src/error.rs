use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("exponent denominator exceeds p^{level}")]
    ExponentLevelMismatch { level: u32 },
    #[error("inexact division by p^{k}")]
    InexactDivision { k: u32 },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("elements belong to different algebras")]
    AmbientMismatch,
    #[error("precision exhausted: need {needed} p-adic digits, have {available}")]
    PrecisionLoss { needed: u32, available: u32 },
    #[error("coefficient overflow during lifted arithmetic")]
    Overflow,
    #[error("linear system too large: {0} unknowns")]
    TooLarge(usize),

    #[error("integrality failure deriving Witt polynomial {kind} at index {index}")]
    IntegralityFailure { kind: &'static str, index: usize },
    #[error("Witt vector length mismatch: {0}")]
    LengthMismatch(String),
    #[error("Witt length {n} exceeds the configured cap {cap}")]
    LengthCap { n: usize, cap: usize },

    #[error("invalid tower spec: {0}")]
    InvalidSpec(String),
    #[error("no p-th root at truncation: {0}")]
    NoRootAtTruncation(String),
    #[error("cannot extend p-big sequence: {0}")]
    CannotExtend(String),
    #[error("unit check failed for {0}")]
    UnitCheckFailed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no Witt-perfect witness at current precision: {0}")]
    NoWitness(String),

    #[error("relation does not hold in the module")]
    RelationNotVerified,
    #[error("c * t_(k+1) is not in (x_1..x_k)T at truncation")]
    AlmostCmViolation,

    #[error("polynomial is not monic")]
    NotMonic,

    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown reference `{name}` at {line}:{col}")]
    UnknownReference { name: String, line: usize, col: usize },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
}
