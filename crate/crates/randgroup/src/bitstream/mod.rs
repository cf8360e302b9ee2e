//! Binary sequences, their stagewise approximations, and the exponent
//! profiles they decode to.
//!
//! A finite [`BitString`] always stands for the infinite sequence obtained by
//! appending zeros, so decoding never sees an infinite run of ones.

mod martingale;
mod profile;
mod schedule;

pub use martingale::{martingale_value, Enumeration};
pub use profile::{decode_profile, sample_profile_geometric, ExponentProfile};
pub use schedule::{approx_prefix, ApproximationSchedule};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitstreamError {
    #[error("invalid bit character {ch:?} at offset {offset}")]
    InvalidBit { ch: char, offset: usize },
    #[error("a schedule needs at least one stage")]
    EmptySchedule,
    #[error("enumeration indices must be strictly increasing and at least 1 (got {indices:?})")]
    BadEnumeration { indices: Vec<usize> },
}

/// A finite 0/1 string, read as zero-extended to the right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit `i`, with the implicit zero tail beyond the stored length.
    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// The string extended by one bit.
    pub fn with(&self, bit: bool) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = BitstreamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, ch)| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BitstreamError::InvalidBit { ch, offset }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString::new)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
