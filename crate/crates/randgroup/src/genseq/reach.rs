use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::qarith::{as_unit_prime_power, nth_prime, Rational};

/// The integers `sum_i d_i * beta(i)` over coefficient vectors with
/// `|d_i| <= bound`, restricted to sums that are integers.
///
/// Valid when every non-integer entry is a unit fraction `1/p^e` and no two
/// such fractions share a prime: then such a sum is an integer exactly when
/// each fractional term is, so the reach is `[-radius, radius]` plus bounded
/// multiples of the large integer entries.
#[derive(Debug, Clone)]
pub(crate) struct IntegerReach {
    radius: BigInt,
    /// Integer entries too large to merge into the interval, ascending.
    gens: Vec<BigInt>,
    /// `suffix[k] = radius + bound * sum_{i >= k} gens[i]`.
    suffix: Vec<BigInt>,
    bound: i64,
}

impl IntegerReach {
    /// Reach of `entries` (ignoring `skip`) with coefficients in `[-bound, bound]`.
    /// Returns `None` if an entry has an unsupported shape.
    pub(crate) fn new(entries: &[Rational], skip: Option<usize>, bound: i64) -> Option<Self> {
        let b = BigInt::from(bound);
        let mut radius = BigInt::zero();
        let mut ints = Vec::new();
        let mut primes_seen = Vec::new();
        for (i, x) in entries.iter().enumerate() {
            if Some(i) == skip || x.is_zero() {
                continue;
            }
            if x.is_integer() {
                ints.push(x.numer().abs());
            } else {
                let (idx, e) = as_unit_prime_power(x)?;
                if primes_seen.contains(&idx) {
                    return None;
                }
                primes_seen.push(idx);
                radius += &b / BigInt::from(nth_prime(idx)).pow(e);
            }
        }
        ints.sort();
        let mut gens = Vec::new();
        for g in ints {
            // Consecutive translates of the interval overlap, so they merge.
            if gens.is_empty() && g <= &radius * 2u32 + 1u32 {
                radius += &b * &g;
            } else {
                gens.push(g);
            }
        }
        let mut suffix = vec![radius.clone(); gens.len() + 1];
        for k in (0..gens.len()).rev() {
            suffix[k] = &suffix[k + 1] + &b * &gens[k];
        }
        Some(Self { radius, gens, suffix, bound })
    }

    pub(crate) fn contains(&self, t: &BigInt) -> bool {
        self.contains_from(self.gens.len(), t)
    }

    // Largest generators first: they pin down the fewest coefficients.
    fn contains_from(&self, k: usize, t: &BigInt) -> bool {
        if k == 0 {
            return t.abs() <= self.radius;
        }
        let g = &self.gens[k - 1];
        let rest = self.prefix_extent(k - 1);
        let lo = (t - &rest).div_ceil(g).max(BigInt::from(-self.bound));
        let hi = (t + &rest).div_floor(g).min(BigInt::from(self.bound));
        let mut d = lo;
        while d <= hi {
            if self.contains_from(k - 1, &(t - &d * g)) {
                return true;
            }
            d += 1;
        }
        false
    }

    /// Extent of the reach using only `gens[..k]`.
    fn prefix_extent(&self, k: usize) -> BigInt {
        &self.suffix[0] - &self.suffix[k] + &self.radius
    }

    /// Whether `c * w` lies in the reach for some `c` in `1..=bound`.
    pub(crate) fn hits_multiple(&self, w: &BigInt) -> bool {
        (1..=self.bound).any(|c| self.contains(&(w * c)))
    }

    /// Least nonnegative `w` with no multiple `c * w`, `1 <= c <= bound`,
    /// inside the reach.
    pub(crate) fn least_free(&self) -> BigInt {
        let mut w = &self.radius + BigInt::one();
        while self.hits_multiple(&w) {
            w += 1;
        }
        w
    }
}
