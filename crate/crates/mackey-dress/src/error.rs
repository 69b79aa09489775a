use thiserror::Error;

/// Errors raised by the library. Mathematical "no" answers are never errors;
/// they come back as report values.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
    #[error("group order {order} exceeds the cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("subgroup count exceeds the cap {cap}")]
    SubgroupCap { cap: usize },
    #[error("Amitsur degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("G-set with {points} points exceeds the cap {cap}")]
    PointCap { points: usize, cap: usize },
    #[error("table does not define a group: {0}")]
    NotAGroup(String),
    #[error("objects live over different groups")]
    GroupMismatch,
    #[error("site mismatch: {0}")]
    SiteMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("functor is not a validated Mackey functor: {0}")]
    NotMackey(String),
    #[error("not a homomorphism to {{+1,-1}}: {0}")]
    NotHomomorphism(String),
    #[error("transformation is not natural: {0}")]
    NotNatural(String),
    #[error("family is not hyper-{prime} closed")]
    FamilyNotClosed { prime: u64 },
    #[error("generation fails at p={prime}: cokernel {cokernel}")]
    GenerationFails { prime: u64, cokernel: String },
    #[error("p-local system infeasible: {0}")]
    Infeasible(String),
    #[error("associated graded is not contracted: {0}")]
    NotContracted(String),
    #[error("perturbation is not nilpotent within index {index}")]
    NotNilpotent { index: usize },
    #[error("chain data is not a complex: {0}")]
    NotComplex(String),
    #[error("biset is not bifree: {0}")]
    NotBifree(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn spec_err(spec: &str, reason: impl Into<String>) -> Error {
    Error::Spec { spec: spec.to_string(), reason: reason.into() }
}
