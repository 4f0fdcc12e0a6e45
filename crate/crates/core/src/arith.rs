//! Integer factorization and radicals over arbitrary-precision integers.

use num_bigint::BigUint;
use num_prime::nt_funcs::factors;
use num_prime::{FactorizationConfig, PrimalityTestConfig};
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Trial division limit before switching to Pollard rho.
pub const TRIAL_DIVISION_LIMIT: u64 = 1 << 16;
/// Pollard rho attempts on each remaining composite.
pub const RHO_TRIALS: usize = 64;

/// Prime factorization `[(p, e)]` with `p` ascending. Zero is rejected and
/// one has the empty factorization.
pub fn factor(n: &BigUint) -> Result<Vec<(BigUint, usize)>> {
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor 0".into()));
    }
    if n.is_one() {
        return Ok(Vec::new());
    }
    let mut config = FactorizationConfig::default();
    config.primality_config = PrimalityTestConfig::bpsw();
    config.td_limit = Some(TRIAL_DIVISION_LIMIT);
    config.rho_trials = RHO_TRIALS;
    let (found, rest) = factors(n.clone(), Some(config));
    if let Some(rest) = rest {
        let rest: Vec<String> = rest.iter().map(|r| r.to_string()).collect();
        return Err(Error::FactorizationBudget(format!(
            "{n} (unfactored cofactors: {})",
            rest.join(", ")
        )));
    }
    Ok(found.into_iter().collect())
}

/// Distinct prime divisors, ascending.
pub fn prime_divisors(n: &BigUint) -> Result<Vec<BigUint>> {
    Ok(factor(n)?.into_iter().map(|(p, _)| p).collect())
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: &BigUint) -> Result<BigUint> {
    Ok(prime_divisors(n)?.into_iter().product())
}
