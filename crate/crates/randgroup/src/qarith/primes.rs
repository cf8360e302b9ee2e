use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

const TABLE_LIMIT: usize = 120_000;

fn table() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; TABLE_LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < TABLE_LIMIT {
            if sieve[i] {
                (i * i..TABLE_LIMIT).step_by(i).for_each(|k| sieve[k] = false);
            }
            i += 1;
        }
        (0..TABLE_LIMIT).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

/// `p_i`, with `p_0 = 2`.
///
/// # Panics
/// If `i` is beyond the built-in table (over eleven thousand primes).
pub fn nth_prime(i: usize) -> u64 {
    *table().get(i).unwrap_or_else(|| panic!("prime index {i} exceeds the prime table"))
}

/// Index of `p` in the prime sequence, if `p` is a tabulated prime.
pub fn prime_index(p: u64) -> Option<usize> {
    table().binary_search(&p).ok()
}

pub fn is_prime(p: u64) -> bool {
    if (p as usize) < TABLE_LIMIT {
        return prime_index(p).is_some();
    }
    (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Factors `n` over the first `limit` primes, returning `(index, exponent)`
/// pairs and the unfactored cofactor.
pub fn factor_small(n: &BigInt, limit: usize) -> (Vec<(usize, u32)>, BigInt) {
    let mut rest = n.abs();
    let mut factors = Vec::new();
    for (i, &p) in table().iter().enumerate().take(limit) {
        if rest.is_one() {
            break;
        }
        let pb = BigInt::from(p);
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            factors.push((i, e));
        }
    }
    (factors, rest)
}

/// `(i, e)` with `x = 1/p_i^e`, `e >= 1`, if `x` has that shape.
pub fn as_unit_prime_power(x: &Rational) -> Option<(usize, u32)> {
    if !x.numer().is_one() || x.denom().is_one() {
        return None;
    }
    let d = x.denom();
    for (i, &p) in table().iter().enumerate() {
        let pb = BigInt::from(p);
        if (d % &pb).is_zero() {
            let e = valuation(d, p);
            return (pb.pow(e) == *d).then_some((i, e));
        }
        if let Some(small) = d.to_u64() {
            if p.saturating_mul(p) > small {
                // `d` itself is prime.
                return prime_index(small).map(|j| (j, 1));
            }
        }
    }
    None
}

/// Prime indices dividing `n` (over the tabulated primes), ascending.
pub fn prime_support(n: &BigInt) -> Vec<usize> {
    factor_small(n, table().len()).0.into_iter().map(|(i, _)| i).collect()
}
