use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("partial bijections live on different carriers")]
    CarrierMismatch,
    #[error("parts {first} and {second} are not orthogonal")]
    Overlap { first: usize, second: usize },
    #[error("{what}: {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: BigUint,
        cap: BigUint,
    },
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("class {class} has points of unequal weight")]
    UnequalClassWeights { class: usize },
    #[error("generator {name} maps point {from} to {to} outside its class")]
    CrossesClasses {
        name: String,
        from: usize,
        to: usize,
    },
    #[error("not a partial bijection: {0}")]
    NotInjective(String),
    #[error("point {point} out of range for carrier of size {size}")]
    PointOutOfRange { point: usize, size: usize },
    #[error("assignment has {got} values, ball has {expected} elements")]
    MissingValue { expected: usize, got: usize },
    #[error("d = {d} is not divisible by the required {divisor}")]
    Divisibility { d: usize, divisor: usize },
    #[error("anchor element is not in the ball of radius {radius}")]
    AnchorOutsideBall { radius: usize },
    #[error("inverse semigroup is not principal: {0}")]
    NotPrincipal(String),
    #[error("restrictions to the shared semigroup differ at pair {0}")]
    AnchorMismatch(usize),
    #[error("permutation does not commute with the embedded semigroup")]
    NotInCentralizer,
    #[error("ball radius must be at least 1")]
    ZeroRadius,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
