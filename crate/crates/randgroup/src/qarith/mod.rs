//! Exact arithmetic for subgroups of `(Q, +)`: rationals, primes, integer
//! representations `sigma` with value `sigma . beta`, and membership tests.

mod primes;
mod rational;

pub use primes::{as_unit_prime_power, factor_small, is_prime, nth_prime, prime_index, prime_support, valuation};
pub use rational::Rational;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bitstream::ExponentProfile;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QarithError {
    #[error("representation of length {sigma} needs a prefix of at least that length (got {beta})")]
    LengthMismatch { sigma: usize, beta: usize },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
    #[error("generator {q}/{m} is not in lowest terms")]
    NotCoprime { q: BigUint, m: BigUint },
    #[error("denominator must be positive")]
    ZeroModulus,
    #[error("all values are zero, so they generate the trivial subgroup")]
    TrivialSubgroup,
}

/// An integer vector `sigma`, denoting `sum_i sigma(i) * beta(i)`.
/// Trailing zeros do not change the value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Representation(pub Vec<i64>);

impl Representation {
    pub fn new(entries: Vec<i64>) -> Self {
        Self(entries)
    }

    /// `I_len(value)`: `len - 1` zeros followed by `value`.
    pub fn unit(len: usize, value: i64) -> Self {
        assert!(len >= 1, "unit vectors have length at least 1");
        let mut v = vec![0; len];
        v[len - 1] = value;
        Self(v)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    /// Length once trailing zeros are dropped.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1)
    }

    pub fn is_zero_vector(&self) -> bool {
        self.support_len() == 0
    }

    pub fn padded(&self, len: usize) -> Self {
        let mut v = self.0.clone();
        if v.len() < len {
            v.resize(len, 0);
        }
        Self(v)
    }

    /// `(position, entry)` if exactly one entry is nonzero.
    pub fn single_entry(&self) -> Option<(usize, i64)> {
        let mut found = None;
        for (i, &x) in self.0.iter().enumerate() {
            if x != 0 {
                if found.is_some() {
                    return None;
                }
                found = Some((i, x));
            }
        }
        found
    }

    /// Entrywise difference after padding both to the longer length.
    pub fn difference(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self((0..n).map(|i| self.0.get(i).copied().unwrap_or(0) - other.0.get(i).copied().unwrap_or(0)).collect())
    }

    pub fn sum(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        Self((0..n).map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0)).collect())
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self(self.0.iter().map(|x| x * k).collect())
    }
}

impl From<Vec<i64>> for Representation {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// The cyclic subgroup `<q/m>`, with `q = 0` standing for `{0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupSpec {
    q: BigUint,
    m: BigUint,
}

impl SubgroupSpec {
    /// Checks that `q/m` is already in lowest terms.
    pub fn new(q: impl Into<BigUint>, m: impl Into<BigUint>) -> Result<Self, QarithError> {
        let (q, m) = (q.into(), m.into());
        if m.is_zero() {
            return Err(QarithError::ZeroModulus);
        }
        if !q.gcd(&m).is_one() && !(q.is_zero() && m.is_one()) {
            return Err(QarithError::NotCoprime { q, m });
        }
        Ok(Self { q, m })
    }

    /// `<q/m>` after cancelling common factors.
    pub fn reduced(q: impl Into<BigUint>, m: impl Into<BigUint>) -> Result<Self, QarithError> {
        let (q, m) = (q.into(), m.into());
        if m.is_zero() {
            return Err(QarithError::ZeroModulus);
        }
        if q.is_zero() {
            return Ok(Self::trivial());
        }
        let g = q.gcd(&m);
        Ok(Self { q: q / &g, m: m / g })
    }

    /// `<|x|>` for a rational generator.
    pub fn generated_by(x: &Rational) -> Self {
        let q = x.numer().magnitude().clone();
        let m = x.denom().magnitude().clone();
        if q.is_zero() {
            Self::trivial()
        } else {
            Self { q, m }
        }
    }

    pub fn integers() -> Self {
        Self { q: BigUint::one(), m: BigUint::one() }
    }

    pub fn trivial() -> Self {
        Self { q: BigUint::zero(), m: BigUint::one() }
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    pub fn is_trivial(&self) -> bool {
        self.q.is_zero()
    }

    /// The generator `q/m`.
    pub fn generator(&self) -> Rational {
        Rational::new(BigInt::from(self.q.clone()), BigInt::from(self.m.clone())).expect("m is positive")
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.q, self.m)
    }
}

impl FromStr for SubgroupSpec {
    type Err = QarithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QarithError::Parse(s.to_string());
        let (q, m) = match s.trim().split_once('/') {
            Some((q, m)) => (q.trim(), m.trim()),
            None => (s.trim(), "1"),
        };
        let q: BigUint = q.parse().map_err(|_| bad())?;
        let m: BigUint = m.parse().map_err(|_| bad())?;
        SubgroupSpec::new(q, m)
    }
}

impl Serialize for SubgroupSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("SubgroupSpec", 2)?;
        st.serialize_field("q", &self.q.to_string())?;
        st.serialize_field("m", &self.m.to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SubgroupSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            q: String,
            m: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        format!("{}/{}", raw.q, raw.m).parse().map_err(serde::de::Error::custom)
    }
}

/// `sum_i sigma(i) * beta_prefix(i)`.
pub fn repr_value(sigma: &Representation, beta_prefix: &[Rational]) -> Result<Rational, QarithError> {
    if sigma.len() > beta_prefix.len() {
        return Err(QarithError::LengthMismatch { sigma: sigma.len(), beta: beta_prefix.len() });
    }
    let mut acc = Rational::zero();
    for (&c, b) in sigma.entries().iter().zip(beta_prefix) {
        if c != 0 {
            acc += &b.scale(c);
        }
    }
    Ok(acc)
}

/// Whether the denominator of `x` divides `prod_i p_i^{n_i}`.
pub fn in_group(x: &Rational, profile: &ExponentProfile) -> bool {
    let mut d = x.denom().clone();
    for (i, &n) in profile.exponents().iter().enumerate() {
        if d.is_one() {
            break;
        }
        if n == 0 {
            continue;
        }
        let p = BigInt::from(nth_prime(i));
        let mut k = 0;
        while k < n && (&d % &p).is_zero() {
            d /= &p;
            k += 1;
        }
    }
    d.is_one()
}

/// Whether `x` lies in `<q/m>`, i.e. `x * m / q` is an integer.
pub fn in_span(x: &Rational, spec: &SubgroupSpec) -> bool {
    if spec.is_trivial() {
        return x.is_zero();
    }
    let q = BigInt::from(spec.q.clone());
    let m = BigInt::from(spec.m.clone());
    (x.numer() * m).is_multiple_of(&(x.denom() * q))
}

/// Whether `x + Z` lies in `<q/m> + Z`, i.e. `x * m` is an integer.
pub fn in_span_mod_one(x: &Rational, spec: &SubgroupSpec) -> bool {
    if spec.is_trivial() {
        return x.is_integer();
    }
    let m = BigInt::from(spec.m.clone());
    (x.numer() * m).is_multiple_of(x.denom())
}

/// The generator of the subgroup generated by `values`.
pub fn reduce_generator(values: &[Rational]) -> Result<SubgroupSpec, QarithError> {
    let lcm = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let g = values.iter().fold(BigInt::zero(), |acc, v| acc.gcd(&(v.numer() * (&lcm / v.denom()))));
    if g.is_zero() {
        return Err(QarithError::TrivialSubgroup);
    }
    SubgroupSpec::reduced(g.magnitude().clone(), lcm.magnitude().clone())
}
