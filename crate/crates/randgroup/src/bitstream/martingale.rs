use num_bigint::BigUint;
use num_traits::One;

use super::{BitString, BitstreamError};

/// A strictly increasing list of zero-counts `i_0 < i_1 < ...`, each at
/// least 1 (the `i`-th zero of a string is counted from 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    indices: Vec<usize>,
}

impl Enumeration {
    pub fn new(indices: Vec<usize>) -> Result<Self, BitstreamError> {
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || indices.first() == Some(&0) {
            return Err(BitstreamError::BadEnumeration { indices });
        }
        Ok(Self { indices })
    }

    /// `(1, 2, ..., n)`.
    pub fn first_n(n: usize) -> Self {
        Self { indices: (1..=n).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Value of the betting strategy that wagers the `i_j`-th zero is followed by
/// a one.
///
/// Returns 0 once some `i_j`-th zero is followed by a zero. Otherwise, with
/// `j` the largest index such that `j = 0` or the string has at least `i_j`
/// zeros, returns `2^{j+1}` when the `i_j`-th zero exists and is followed by
/// a bit, and `2^j` otherwise.
pub fn martingale_value(enumeration: &Enumeration, sigma: &BitString) -> BigUint {
    let bits = sigma.bits();
    let zeros: Vec<usize> = (0..bits.len()).filter(|&k| !bits[k]).collect();
    let zero_at = |count: usize| zeros.get(count - 1).copied();

    for &i in enumeration.indices() {
        if let Some(pos) = zero_at(i) {
            if bits.get(pos + 1) == Some(&false) {
                return BigUint::from(0u32);
            }
        }
    }

    let idx = enumeration.indices();
    if idx.is_empty() {
        return BigUint::one();
    }
    let j = idx.iter().rposition(|&i| zeros.len() >= i).unwrap_or(0);
    let bet_settled = zero_at(idx[j]).is_some_and(|pos| pos + 1 < bits.len());
    BigUint::one() << (j + usize::from(bet_settled))
}
