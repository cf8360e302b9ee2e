//! Szmielew invariants of subgroups of `(Q, +)` and the elementary
//! equivalence test they induce.
//!
//! A subgroup is described by its exponent profile: `n_i` is the largest
//! power of `p_i` dividing 1 in the group, or infinite. Subgroups of `Q` are
//! torsion-free, so only `gamma_p = dim(G / pG)` can differ between them,
//! and it is 0 exactly when `p` divides the group infinitely.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bitstream::ExponentProfile;
use crate::qarith::{is_prime, nth_prime, prime_index, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("the power n must be at least 1")]
    ZeroPower,
}

/// A profile exponent: finite, or infinite for `p` dividing the group infinitely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exp {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Finite(n) => write!(f, "{n}"),
            Exp::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Exp::Finite(n) => serializer.serialize_u32(*n),
            Exp::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::N(n) => Ok(Exp::Finite(n)),
            Raw::S(s) if s == "inf" || s == "infinity" => Ok(Exp::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("expected a count or \"inf\", got {s:?}"))),
        }
    }
}

/// Exponents `n_0, n_1, ...` listed explicitly up to some index, then all
/// equal to `tail`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtendedProfile {
    pub explicit: Vec<Exp>,
    pub tail: Exp,
}

impl<'de> Deserialize<'de> for ExtendedProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<Exp>),
            Full {
                explicit: Vec<Exp>,
                #[serde(default = "zero")]
                tail: Exp,
            },
        }
        fn zero() -> Exp {
            Exp::Finite(0)
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::List(explicit) => Self::new(explicit, Exp::Finite(0)),
            Raw::Full { explicit, tail } => Self::new(explicit, tail),
        })
    }
}

impl ExtendedProfile {
    pub fn new(explicit: Vec<Exp>, tail: Exp) -> Self {
        Self { explicit, tail }
    }

    /// `(Z, +)`.
    pub fn integers() -> Self {
        Self::new(Vec::new(), Exp::Finite(0))
    }

    /// `(Q, +)`.
    pub fn rationals() -> Self {
        Self::new(Vec::new(), Exp::Infinite)
    }

    /// `Z[1/p]` for the prime with index `i`.
    pub fn localization(i: usize) -> Self {
        let mut explicit = vec![Exp::Finite(0); i];
        explicit.push(Exp::Infinite);
        Self::new(explicit, Exp::Finite(0))
    }

    pub fn get(&self, i: usize) -> Exp {
        self.explicit.get(i).copied().unwrap_or(self.tail)
    }
}

impl From<&ExponentProfile> for ExtendedProfile {
    fn from(p: &ExponentProfile) -> Self {
        Self::new(p.exponents().iter().map(|&n| Exp::Finite(n)).collect(), Exp::Finite(0))
    }
}

/// Set of prime indices dividing the group infinitely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeSet {
    /// Finitely many indices.
    Finite(BTreeSet<usize>),
    /// All indices except the listed ones.
    AllBut(BTreeSet<usize>),
}

impl PrimeSet {
    pub fn contains(&self, i: usize) -> bool {
        match self {
            PrimeSet::Finite(s) => s.contains(&i),
            PrimeSet::AllBut(s) => !s.contains(&i),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, PrimeSet::Finite(s) if s.is_empty())
    }
}

/// `P(G)` for an extended profile.
pub fn infinitely_dividing_primes(profile: &ExtendedProfile) -> PrimeSet {
    let pick = |want: bool| {
        profile.explicit.iter().enumerate().filter(|(_, e)| (**e == Exp::Infinite) == want).map(|(i, _)| i).collect()
    };
    match profile.tail {
        Exp::Infinite => PrimeSet::AllBut(pick(false)),
        Exp::Finite(_) => PrimeSet::Finite(pick(true)),
    }
}

/// `(alpha_{p,n}, beta_p, gamma_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SzmielewTriple {
    pub alpha: u64,
    pub beta_inv: u64,
    pub gamma: u64,
}

/// The Szmielew invariants of the group with `profile` at the prime `p`.
///
/// `alpha` and `beta` vanish because the group has no torsion; `gamma` is
/// `dim(G / pG)`, which is 0 if `p` divides the group infinitely and 1
/// otherwise. None of them depends on `n`.
pub fn szmielew_invariants(profile: &ExtendedProfile, p: u64, n: u32) -> Result<SzmielewTriple, TheoryError> {
    if n == 0 {
        return Err(TheoryError::ZeroPower);
    }
    let i = prime_index(p).ok_or(TheoryError::NotPrime(p))?;
    let gamma = if infinitely_dividing_primes(profile).contains(i) { 0 } else { 1 };
    Ok(SzmielewTriple { alpha: 0, beta_inv: 0, gamma })
}

/// Whether the two groups satisfy the same first-order sentences, i.e.
/// have the same infinitely dividing primes.
pub fn elementarily_equivalent(a: &ExtendedProfile, b: &ExtendedProfile) -> bool {
    let (pa, pb) = (infinitely_dividing_primes(a), infinitely_dividing_primes(b));
    match (&pa, &pb) {
        (PrimeSet::Finite(x), PrimeSet::Finite(y)) | (PrimeSet::AllBut(x), PrimeSet::AllBut(y)) => x == y,
        _ => false,
    }
}

/// Whether the group is elementarily equivalent to `(Z, +)`.
pub fn equiv_to_integers(profile: &ExtendedProfile) -> bool {
    infinitely_dividing_primes(profile).is_empty()
}

/// `m * q^k + l * p = 1`, exhibiting `q^{-k} = m + p * (l * q^{-k})`, so
/// that `q^{-k}` is congruent to the integer `m` modulo `pG`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case2Certificate {
    pub q: u64,
    pub k: u32,
    pub m: BigInt,
    pub l: BigInt,
}

impl Case2Certificate {
    /// Checks `m * q^k + l * p = 1` and the decomposition of `q^{-k}`.
    pub fn verify(&self, p: u64) -> bool {
        let qk = BigInt::from(self.q).pow(self.k);
        let bez = &self.m * &qk + &self.l * BigInt::from(p);
        let x = Rational::unit_fraction(self.q, self.k);
        let rest = Rational::new(&self.l * BigInt::from(p), qk).expect("q^k positive");
        bez.is_one() && x == &Rational::integer(self.m.clone()) + &rest
    }
}

/// Certificates for every generator `q^{-k}` with `k <= min(n_q, k_max)`,
/// `q != p`, among the first `primes` primes, showing `dim(G / pG) <= 1`.
///
/// Returns `None` if `p` divides the group infinitely (then `pG = G`).
pub fn case2_certificates(
    profile: &ExtendedProfile,
    p: u64,
    primes: usize,
    k_max: u32,
) -> Result<Option<Vec<Case2Certificate>>, TheoryError> {
    if !is_prime(p) {
        return Err(TheoryError::NotPrime(p));
    }
    let pi = prime_index(p).ok_or(TheoryError::NotPrime(p))?;
    if infinitely_dividing_primes(profile).contains(pi) {
        return Ok(None);
    }
    let mut out = Vec::new();
    for i in (0..primes).filter(|&i| i != pi) {
        let q = nth_prime(i);
        let top = match profile.get(i) {
            Exp::Finite(n) => n.min(k_max),
            Exp::Infinite => k_max,
        };
        for k in 1..=top {
            let qk = BigInt::from(q).pow(k);
            let e = qk.extended_gcd(&BigInt::from(p));
            debug_assert!(e.gcd.is_one());
            out.push(Case2Certificate { q, k, m: e.x, l: e.y });
        }
    }
    Ok(Some(out))
}
