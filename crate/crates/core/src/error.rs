use thiserror::Error;

use crate::algebra::Var;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    ArityMismatch { left: Vec<Var>, right: Vec<Var> },

    #[error("exponent tuple of length {got} does not match {expected} variables")]
    ExponentArity { expected: usize, got: usize },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("exponent s must be positive")]
    ZeroExponent,

    #[error("lambda = {lambda} is not in Λ_{s} for p = {p} (need odd λ with |λ| < p^{s})")]
    LambdaOutOfRange { p: u64, s: u32, lambda: i64 },

    #[error("polynomial division by a linear factor in {var:?} leaves a nonzero remainder")]
    InexactDivision { var: Var },

    #[error("variable {0:?} is not present in the polynomial")]
    MissingVariable(Var),

    #[error("digit w = {w} is outside 0..{p}")]
    DigitOutOfRange { p: u64, w: u64 },

    #[error("p^s = {size} exceeds the degree budget {budget}")]
    DegreeBudget { size: u64, budget: u64 },

    #[error("modulus p^N = {p}^{precision} does not fit the residue word")]
    PrecisionTooLarge { p: u64, precision: u32 },

    #[error("point outside the domain: {0}")]
    OutsideDomain(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
