//! Stage-wise builders of generating sequences and the enumerators that read
//! equality, inequality and subgroup membership off a finished run.
//!
//! A run is the list of snapshots `beta_0, beta_1, ...` produced by
//! [`run_builder`]. The stage-`s` window (entries bounded by `s + 1`, length
//! at most `s + 1`, or `s` and `|beta^s|` for the subring-style variants) is
//! recorded on each snapshot as [`WindowBounds`]; windows are materialized
//! only on demand, against a [`VectorWindow`].

mod crt;
mod enumerate;
mod reach;
mod subring;
pub mod verify;

pub use crt::crt_unit_inverse;
pub use enumerate::{
    enumerate_eq_mod1, enumerate_neq, enumerate_subgroup_reps, enumerate_subring_complement, fgsub_threshold,
    subring_governing_stages, PairStream, Relation, VectorWindow, WindowMember, WindowPair,
};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::{decode_profile, ApproximationSchedule, ExponentProfile};
use crate::qarith::{as_unit_prime_power, nth_prime, repr_value, Rational, Representation, SubgroupSpec};
use reach::IntegerReach;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenSeqError {
    #[error("no prime is selected by the final stage, so there is no p with 1/p in the structure")]
    NoInvertiblePrime,
    #[error("operation needs a {expected} run, got {found}")]
    WrongVariant { expected: &'static str, found: Variant },
    #[error("crt_unit_inverse({prime_power}, s={s}, ell={ell}): {reason}")]
    InvalidCrt { prime_power: BigUint, s: u32, ell: usize, reason: String },
    #[error("builder run is empty")]
    EmptyRun,
    #[error("the trivial subgroup has no r.e. set of representations")]
    TrivialSpec,
    #[error("position {position} is out of range for a sequence of length {len}")]
    BadPosition { position: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Core,
    Mod1,
    Fgsub,
    Subring,
    Prufer,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Core, Variant::Mod1, Variant::Fgsub, Variant::Subring, Variant::Prufer];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Core => "core",
            Variant::Mod1 => "mod1",
            Variant::Fgsub => "fgsub",
            Variant::Subring => "subring",
            Variant::Prufer => "prufer",
        }
    }

    /// Subring-style variants grow by prime-power blocks and have no fixed length.
    pub fn is_subring_style(self) -> bool {
        matches!(self, Variant::Subring | Variant::Prufer)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant {s:?} (expected core, mod1, fgsub, subring or prufer)"))
    }
}

/// One entry replacement, made while moving to `stage`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub stage: usize,
    pub index: usize,
    pub old: Rational,
    pub new: Rational,
}

/// Coefficient and length bounds of the window committed at a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowBounds {
    pub max_entry: usize,
    pub max_len: usize,
}

impl WindowBounds {
    pub fn admits(&self, sigma: &Representation) -> bool {
        sigma.support_len() <= self.max_len && sigma.max_abs() <= self.max_entry as u64
    }
}

/// One stage of a builder run.
#[derive(Debug, Clone)]
pub struct GenSeqState {
    pub variant: Variant,
    pub stage: usize,
    pub beta: Vec<Rational>,
    /// Profile decoded from `R^s`. For the subring-style variants this holds
    /// the raw bits (one 0/1 entry per prime) instead.
    pub profile_view: ExponentProfile,
    /// Every replacement made so far, in order.
    pub change_log: Vec<Change>,
    pub committed: WindowBounds,
    /// The fixed prime index `p` of the subring-style variants.
    pub fixed_prime: Option<usize>,
    pub aux: Option<SubgroupSpec>,
    schedule: Arc<ApproximationSchedule>,
}

impl GenSeqState {
    pub fn schedule(&self) -> &ApproximationSchedule {
        &self.schedule
    }

    /// Changes made while moving to this stage.
    pub fn changes_at_this_stage(&self) -> impl Iterator<Item = &Change> {
        self.change_log.iter().filter(move |c| c.stage == self.stage)
    }

    /// `sigma . beta_s`, or `None` when `sigma` reaches past the current sequence.
    pub fn value(&self, sigma: &Representation) -> Option<Rational> {
        let len = sigma.support_len();
        let head = Representation::new(sigma.entries()[..len].to_vec());
        (len <= self.beta.len()).then(|| repr_value(&head, &self.beta).expect("length checked"))
    }
}

/// A finished run: snapshots for stages `0..=budget`.
pub type BuilderRun = Vec<GenSeqState>;

fn profile_at(variant: Variant, schedule: &ApproximationSchedule, s: usize) -> ExponentProfile {
    let bits = schedule.approx_prefix(s);
    if variant.is_subring_style() {
        ExponentProfile::new(bits.bits().iter().map(|&b| u32::from(b)).collect())
    } else {
        decode_profile(bits)
    }
}

fn committed_window(variant: Variant, stage: usize, beta_len: usize) -> WindowBounds {
    if variant.is_subring_style() {
        WindowBounds { max_entry: stage, max_len: beta_len }
    } else {
        WindowBounds { max_entry: stage + 1, max_len: stage + 1 }
    }
}

/// Stage-0 state: `(1)`, or `(1, 1/p)` with `p` the least prime selected by
/// the final stage for the subring-style variants.
pub fn init_builder(
    variant: Variant,
    schedule: &ApproximationSchedule,
    aux: Option<SubgroupSpec>,
) -> Result<GenSeqState, GenSeqError> {
    let mut fixed_prime = None;
    let mut beta = vec![Rational::one()];
    if variant.is_subring_style() {
        let p = schedule.final_stage().bits().iter().position(|&b| b).ok_or(GenSeqError::NoInvertiblePrime)?;
        beta.push(Rational::unit_fraction(nth_prime(p), 1));
        fixed_prime = Some(p);
    }
    Ok(GenSeqState {
        variant,
        stage: 0,
        committed: committed_window(variant, 0, beta.len()),
        beta,
        profile_view: profile_at(variant, schedule, 0),
        change_log: Vec::new(),
        fixed_prime,
        aux,
        schedule: Arc::new(schedule.clone()),
    })
}

/// Advances one stage.
pub fn step_builder(state: &GenSeqState) -> GenSeqState {
    let s = state.stage;
    let next_profile = profile_at(state.variant, &state.schedule, s + 1);
    let mut beta = state.beta.clone();
    let mut log = state.change_log.clone();
    if state.variant.is_subring_style() {
        subring::step(state, &next_profile, &mut beta, &mut log);
    } else {
        replace_stale(state, &next_profile, &mut beta, &mut log);
        beta.push(next_generator(&next_profile, &beta, s + 1));
    }
    GenSeqState {
        variant: state.variant,
        stage: s + 1,
        committed: committed_window(state.variant, s + 1, beta.len()),
        beta,
        profile_view: next_profile,
        change_log: log,
        fixed_prime: state.fixed_prime,
        aux: state.aux.clone(),
        schedule: Arc::clone(&state.schedule),
    }
}

/// Replaces, left to right, every `1/p_i^e` whose exponent no longer matches.
fn replace_stale(state: &GenSeqState, next: &ExponentProfile, beta: &mut [Rational], log: &mut Vec<Change>) {
    let s = state.stage;
    for k in 0..beta.len() {
        let Some((i, e)) = as_unit_prime_power(&beta[k]) else { continue };
        if e == next.get(i) {
            continue;
        }
        let new = match state.variant {
            Variant::Core => {
                let reach = IntegerReach::new(beta, Some(k), 2 * (s as i64 + 1))
                    .expect("core entries are integers or unit fractions of distinct primes");
                Rational::integer(reach.least_free())
            }
            Variant::Mod1 => Rational::zero(),
            Variant::Fgsub => {
                if i == 0 {
                    Rational::one()
                } else {
                    let pp = BigUint::from(nth_prime(i)).pow(e);
                    let w = crt_unit_inverse(&pp, s as u32, i).expect("valid by construction");
                    Rational::integer(BigInt::from(w))
                }
            }
            Variant::Subring | Variant::Prufer => unreachable!("handled by the subring step"),
        };
        log.push(Change { stage: s + 1, index: k, old: beta[k].clone(), new: new.clone() });
        beta[k] = new;
    }
}

/// `1/p_j^{n_j}` for the least `j <= limit` with `n_j >= 1` not yet in `beta`, else 1.
fn next_generator(profile: &ExponentProfile, beta: &[Rational], limit: usize) -> Rational {
    for j in 0..=limit {
        let n = profile.get(j);
        if n == 0 {
            continue;
        }
        let cand = Rational::unit_fraction(nth_prime(j), n);
        if !beta.contains(&cand) {
            return cand;
        }
    }
    Rational::one()
}

/// Runs stages `0..=budget`.
pub fn run_builder(
    variant: Variant,
    schedule: &ApproximationSchedule,
    aux: Option<SubgroupSpec>,
    budget: usize,
) -> Result<BuilderRun, GenSeqError> {
    let mut run = vec![init_builder(variant, schedule, aux)?];
    for _ in 0..budget {
        let next = step_builder(run.last().expect("nonempty"));
        run.push(next);
    }
    Ok(run)
}

/// Final state of a Prüfer-style run of `budget` stages.
pub fn build_prufer_genseq(schedule: &ApproximationSchedule, budget: usize) -> Result<GenSeqState, GenSeqError> {
    let run = run_builder(Variant::Prufer, schedule, None, budget)?;
    Ok(run.into_iter().last().expect("nonempty"))
}

/// Least nonnegative integer `w` that, substituted at `position`, keeps every
/// pair in `window` unequal under `beta`.
///
/// Each pair `(sigma, tau)` with difference `d` forbids at most the single
/// solution of `d(position) * w = -sum_{i != position} d(i) * beta(i)`.
pub fn replacement_integer<'a, I>(window: I, beta: &[Rational], position: usize) -> Result<BigInt, GenSeqError>
where
    I: IntoIterator<Item = (&'a Representation, &'a Representation)>,
{
    if position >= beta.len() {
        return Err(GenSeqError::BadPosition { position, len: beta.len() });
    }
    let mut forbidden = std::collections::BTreeSet::new();
    for (sigma, tau) in window {
        let d = sigma.difference(tau);
        let c = d.entries().get(position).copied().unwrap_or(0);
        if c == 0 {
            continue;
        }
        let mut rest = Rational::zero();
        for (i, &di) in d.entries().iter().enumerate() {
            if i != position && di != 0 {
                rest += &beta[i].scale(di);
            }
        }
        let sol = Rational::new(-rest.numer(), rest.denom() * BigInt::from(c)).expect("c is nonzero");
        if sol.is_integer() {
            forbidden.insert(sol.numer().clone());
        }
    }
    let mut w = BigInt::zero();
    while forbidden.contains(&w) {
        w += 1;
    }
    Ok(w)
}
