use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("memory parameter p = {0} outside [0, 1]")]
    MemoryParameter(f64),
    #[error("operation requires q < 1 (p < 1), got q = {0}")]
    DegenerateMemory(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("counts A = {a}, B = {b} do not sum to n = {n}")]
    InconsistentCounts { a: u64, b: u64, n: u64 },
    #[error("inconsistent coupled state: {0}")]
    InconsistentState(&'static str),
    #[error("word is not reduced at position {0}")]
    NotReduced(usize),
    #[error("invalid letter {0:?}")]
    InvalidLetter(char),
    #[error("path increment at step {step} is not ±1")]
    InvalidIncrement { step: usize },
    #[error("u = {0} outside the open interval (0, 1)")]
    OutsideUnitInterval(f64),
    #[error("enumeration horizon {0} exceeds the limit of {max}", max = crate::enumerate::MAX_HORIZON)]
    HorizonTooLarge(u32),
    #[error("argument hits a gamma pole")]
    GammaPole,
    #[error("hypergeometric series domain violation: {0}")]
    HypergeometricDomain(&'static str),
    #[error("hypergeometric series did not converge after {terms} terms")]
    SeriesDivergence { terms: usize },
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {abs_err:e} after {evaluations} evaluations"
    )]
    QuadratureNonConvergence {
        value: f64,
        abs_err: f64,
        evaluations: usize,
    },
}
