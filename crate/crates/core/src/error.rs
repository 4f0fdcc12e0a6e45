use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^16")]
    NotPrime(u64),
    #[error("bad shape: expected {expected} entries, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("matrix is not a symplectic similitude")]
    NotSymplectic,
    #[error("polynomial degrees differ ({0} vs {1})")]
    DegreeMismatch(usize, usize),
    #[error("moduli differ ({0} vs {1})")]
    ModulusMismatch(u32, u32),
    #[error("criterion only defined for l in {{2, 3}}, got {0}")]
    BadEll(u32),
    #[error("radial exponent {k} is not admissible for l = {ell}")]
    BadExponent { k: u64, ell: u32 },
    #[error("enumeration budget exceeded: estimated size {estimate} > budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("projection to factor {0} is not surjective")]
    NotSurjectiveProjection(usize),
    #[error("subgroup of order {order} matches no case of the classification")]
    ClassificationContradiction { order: usize },
    #[error("group is not a product of {expected} factors")]
    NotAProduct { expected: usize },
    #[error("singular Weierstrass model (discriminant zero)")]
    SingularCurve,
    #[error("could not factor {0} within budget")]
    FactorizationBudget(String),
    #[error("p = {0} is not a usable prime of good reduction (p > 3 required)")]
    BadPrime(u64),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("no prime p <= {pmax} is usable for both curves")]
    NoGoodPrimes { pmax: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precision recheck failed for {0}")]
    PrecisionFailure(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not_prime",
            Error::BadShape { .. } => "bad_shape",
            Error::NotSymplectic => "not_symplectic",
            Error::DegreeMismatch(..) => "degree_mismatch",
            Error::ModulusMismatch(..) => "modulus_mismatch",
            Error::BadEll(_) => "bad_ell",
            Error::BadExponent { .. } => "bad_exponent",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NotSurjectiveProjection(_) => "not_surjective_projection",
            Error::ClassificationContradiction { .. } => "classification_contradiction",
            Error::NotAProduct { .. } => "not_a_product",
            Error::SingularCurve => "singular_curve",
            Error::FactorizationBudget(_) => "factorization_budget",
            Error::BadPrime(_) => "bad_prime",
            Error::InternalInconsistency(_) => "internal_inconsistency",
            Error::NoGoodPrimes { .. } => "no_good_primes",
            Error::InvalidInput(_) => "invalid_input",
            Error::PrecisionFailure(_) => "precision_failure",
        }
    }
}
