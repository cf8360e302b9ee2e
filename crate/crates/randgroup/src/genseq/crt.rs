use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::GenSeqError;
use crate::qarith::{nth_prime, valuation};

/// Least positive `w` with `prime_power * w = 1 (mod p_i^s)` for every `i < ell`,
/// where `prime_power` must be a positive power of `p_ell`.
pub fn crt_unit_inverse(prime_power: &BigUint, s: u32, ell: usize) -> Result<BigUint, GenSeqError> {
    let invalid =
        |reason: &str| GenSeqError::InvalidCrt { prime_power: prime_power.clone(), s, ell, reason: reason.to_string() };
    if ell == 0 {
        return Err(invalid("prime index must be at least 1"));
    }
    if s == 0 {
        return Err(invalid("stage must be at least 1"));
    }
    let p = nth_prime(ell);
    let pp = BigInt::from(prime_power.clone());
    if pp.is_zero() || pp.is_one() || BigInt::from(p).pow(valuation(&pp, p)) != pp {
        return Err(invalid("not a positive power of p_ell"));
    }
    let modulus: BigInt = (0..ell).map(|i| BigInt::from(nth_prime(i)).pow(s)).product();
    let ext = pp.extended_gcd(&modulus);
    debug_assert!(ext.gcd.is_one());
    let w = ext.x.mod_floor(&modulus);
    // `w = 0` only when the modulus is 1, which `ell >= 1` rules out.
    Ok(w.to_biguint().expect("reduced modulo a positive modulus"))
}
