//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("modulus base {p} is not prime")]
    CompositeModulus { p: u64 },
    #[error("field of order {order} exceeds the enumeration bound {bound}")]
    BoundExceeded { order: u128, bound: u128 },
    #[error("supplied modulus is reducible over F_{p}")]
    ReducibleModulus { p: u64 },
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("zero input where a nonzero element is required")]
    ZeroInput,
    #[error("no embedding: {sub} does not divide {sup}")]
    NoEmbedding { sub: usize, sup: usize },
    #[error("operands live in incompatible fields or twists")]
    FieldMismatch,
    #[error("right division by the zero polynomial")]
    DivisionByZero,
    #[error("right gcd of two zero polynomials")]
    BothZero,
    #[error("no valid eta exists: F_{{q^2}} \\ ({{zeta, zeta^q}} u F_q) is empty for q = {q}")]
    NoValidEta { q: u64 },
    #[error("no (q+1)-th root of the nu target found in any ambient F_{{q^{{4m}}}} with m <= {cap}")]
    NuNotFound { cap: usize },
    #[error("lambda = 0 is not an admissible parameter")]
    ZeroLambda,
    #[error("j = 0 is not an admissible parameter")]
    ZeroJ,
    #[error("w = 0 is not an admissible torsion coordinate")]
    ZeroW,
    #[error("u = 0 is not an admissible torsion coordinate")]
    ZeroU,
    #[error("ambient field is too small: {0}")]
    AmbientTooSmall(String),
    #[error("denominator vanishes: {0}")]
    Pole(&'static str),
    #[error("w maps to j = 0 (cusp-like numerator zero)")]
    PoleJZero,
    #[error("invalid torsion choice at level {level}: {reason}")]
    InvalidChoice { level: usize, reason: String },
    #[error("formula did not produce an integer")]
    NonInteger,
    #[error("eta is degenerate: j = 0 satisfies the supersingular criterion")]
    DegenerateEta,
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
