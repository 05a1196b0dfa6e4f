use alloc::string::String;

/// Everything that can go wrong inside the core.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("objects live over different coefficient fields or ramification")]
    FieldMismatch,
    #[error("tame degree {m} is divisible by p = {p}")]
    TameDegreeNotCoprime { m: u32, p: u32 },
    #[error("seed precision {seed} does not exceed the contraction bound {bound}")]
    SeedPrecisionTooSmall { seed: i64, bound: i64 },
    #[error("fixed-point search did not converge within depth {0}")]
    NonConvergence(i64),
    #[error("lattice is not effective")]
    NotEffective,
    #[error("Harder-Narasimhan witnesses are not nested")]
    FiltrationWitnessNotNested,
    #[error("two distinct witnesses realize the same Harder-Narasimhan breakpoint")]
    AmbiguousHnStep,
    #[error("subspace is not unstable")]
    NotUnstable,
    #[error("two inequivalent filtrations attain the maximal instability")]
    AmbiguousMaximizer,
    #[error("search space too large: {0}")]
    ScaleTooLarge(String),
    #[error("determinant constraint has no integral solution")]
    DetConstraintInfeasible,
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("length mismatch ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("polygon does not lie above the Hodge polygon with equal endpoints")]
    NotDominating,
    #[error("numerical kernel failure: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn precision(msg: &str) -> Error {
    Error::InsufficientPrecision(String::from(msg))
}
