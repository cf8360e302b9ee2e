use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::schedule::profile_from_rng;
use super::BitString;

/// Exponents `n_i` of the primes `p_i` allowed in denominators of `G_R`.
///
/// The stored vector may end in zeros; comparisons ignore trailing zeros
/// since every index past the end is `0` anyway.
#[derive(Debug, Clone, Default, Eq, Serialize, Deserialize)]
pub struct ExponentProfile {
    exponents: Vec<u32>,
}

impl ExponentProfile {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    /// `n_i`, zero past the stored entries.
    pub fn get(&self, i: usize) -> u32 {
        self.exponents.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Entries without the zero tail.
    pub fn support(&self) -> &[u32] {
        let end = self.exponents.iter().rposition(|&n| n != 0).map_or(0, |i| i + 1);
        &self.exponents[..end]
    }

    /// Indices `i` with `n_i >= 1`, in increasing order.
    pub fn nonzero_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents.iter().enumerate().filter(|(_, &n)| n > 0).map(|(i, _)| i)
    }

    /// Inverse of [`decode_profile`]: emits `1^{n_i} 0` for each stored entry.
    pub fn encode(&self) -> BitString {
        let mut bits = Vec::new();
        for &n in &self.exponents {
            bits.extend(std::iter::repeat(true).take(n as usize));
            bits.push(false);
        }
        BitString::new(bits)
    }
}

impl PartialEq for ExponentProfile {
    fn eq(&self, other: &Self) -> bool {
        self.support() == other.support()
    }
}

impl std::hash::Hash for ExponentProfile {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.support().hash(state);
    }
}

/// Run lengths of ones: `n_0` counts the leading ones, `n_i` the ones
/// between the `i`-th and `(i+1)`-st zero.
///
/// One entry is produced per zero in `bits`, plus one for a trailing run of
/// ones (closed by the implicit zero tail).
pub fn decode_profile(bits: &BitString) -> ExponentProfile {
    let mut exponents = Vec::new();
    let mut run = 0u32;
    for &b in bits.bits() {
        if b {
            run += 1;
        } else {
            exponents.push(run);
            run = 0;
        }
    }
    if run > 0 {
        exponents.push(run);
    }
    ExponentProfile::new(exponents)
}

/// `k` independent draws with `P(n) = 2^{-n-1}`, reproducible from `seed`.
pub fn sample_profile_geometric(seed: u64, k: usize) -> ExponentProfile {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    profile_from_rng(&mut rng, k)
}
