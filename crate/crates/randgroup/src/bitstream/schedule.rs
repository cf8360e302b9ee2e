use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{BitString, BitstreamError, ExponentProfile};

/// A replayable stand-in for a limit-recursive real: the stage-`s` guesses
/// `R^s`, with every stage past the last one equal to the last one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct ApproximationSchedule {
    stages: Vec<BitString>,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    stages: Vec<BitString>,
}

impl TryFrom<RawSchedule> for ApproximationSchedule {
    type Error = BitstreamError;

    fn try_from(raw: RawSchedule) -> Result<Self, Self::Error> {
        Self::new(raw.stages)
    }
}

impl From<ApproximationSchedule> for RawSchedule {
    fn from(s: ApproximationSchedule) -> Self {
        RawSchedule { stages: s.stages }
    }
}

impl ApproximationSchedule {
    pub fn new(stages: Vec<BitString>) -> Result<Self, BitstreamError> {
        if stages.is_empty() {
            return Err(BitstreamError::EmptySchedule);
        }
        Ok(Self { stages })
    }

    /// Parses each stage from a `0`/`1` string.
    pub fn from_strs(stages: &[&str]) -> Result<Self, BitstreamError> {
        Self::new(stages.iter().map(|s| s.parse()).collect::<Result<_, _>>()?)
    }

    /// A schedule that is already converged at stage 0.
    pub fn constant(bits: BitString) -> Self {
        Self { stages: vec![bits] }
    }

    /// A seeded schedule whose limit encodes a geometric profile with
    /// `blocks` draws. The first `noisy_stages` stages agree with the limit
    /// on a growing prefix and carry fresh random bits after it.
    pub fn pseudo_random(seed: u64, blocks: usize, noisy_stages: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let limit = profile_from_rng(&mut rng, blocks.max(1)).encode();
        let mut stages = Vec::with_capacity(noisy_stages + 1);
        for t in 0..noisy_stages {
            let keep = limit.len() * t / noisy_stages;
            let tail = limit.len() - keep + rng.gen_range(0..4);
            let mut bits = limit.bits()[..keep].to_vec();
            bits.extend((0..tail).map(|_| rng.gen::<bool>()));
            stages.push(BitString::new(bits));
        }
        stages.push(limit);
        Self { stages }
    }

    pub fn stages(&self) -> &[BitString] {
        &self.stages
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn final_stage(&self) -> &BitString {
        self.stages.last().expect("schedule is non-empty")
    }

    /// `R^s`; stages past the end repeat the final stage.
    pub fn approx_prefix(&self, s: usize) -> &BitString {
        self.stages.get(s).unwrap_or_else(|| self.final_stage())
    }

    /// Least stage from which bit `i` never changes again.
    pub fn stabilization_bound(&self, i: usize) -> usize {
        let limit = self.final_stage().get(i);
        self.stages.iter().rposition(|stage| stage.get(i) != limit).map_or(0, |last_diff| last_diff + 1)
    }

    /// Least stage from which every bit below `len` is fixed.
    pub fn prefix_stabilization_bound(&self, len: usize) -> usize {
        (0..len).map(|i| self.stabilization_bound(i)).max().unwrap_or(0)
    }
}

/// `R^s` of `schedule`.
pub fn approx_prefix(schedule: &ApproximationSchedule, s: usize) -> &BitString {
    schedule.approx_prefix(s)
}

pub(super) fn profile_from_rng(rng: &mut ChaCha20Rng, count: usize) -> ExponentProfile {
    let exponents = (0..count)
        .map(|_| {
            let mut n = 0u32;
            while rng.gen::<bool>() {
                n += 1;
            }
            n
        })
        .collect();
    ExponentProfile::new(exponents)
}
