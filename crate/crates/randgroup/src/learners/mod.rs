//! Texts, learners for finitely generated subgroups and equality relations,
//! and budgeted adversaries that play the diagonal strategies against them.
//!
//! Hypotheses are structured handles rather than indices into a numbering:
//! two hypotheses are syntactically equal iff they compare equal with `==`
//! (kind and handle), and [`semantic_eq`] compares the sets they denote.

mod adversary;
mod bc;
mod exk;
mod subring;
mod text;

pub use adversary::{
    bc_adversary, ex_adversary, find_stabilising_sequence, refutes, AllEqualLearner, BcAdversaryReport,
    ExAdversaryReport, ExhaustionReason, Falsification, MindChangeWitness, PairConjecture, PairSet, SeenOnlyLearner,
    StabilisingSearch, StabilityMode,
};
pub use bc::{bc_learner_step, mod1_bc_learner_step, BcLearner, BcState, Mod1BcLearner, Mod1BcState};
pub use exk::{
    equality_class_learner_step, exk_learner_step, EqClassLearner, EqClassState, EqualityOracle, ExkLearner, ExkState,
    GroundTruthOracle,
};
pub use subring::{subring_ex_learner_step, SubringExLearner, SubringState};
pub use text::{canonical_text, pair_text, Membership, Text, TextItem, TextTarget, TextWindow};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genseq::VectorWindow;
use crate::qarith::{Rational, Representation, SubgroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("target set has no members in the text window")]
    EmptyTarget,
    #[error("oracle refused query ({sigma}, {tau}): {reason}")]
    OracleRefused { sigma: Representation, tau: Representation, reason: String },
    #[error("text length must be at least 2, got {0}")]
    TextTooShort(usize),
}

/// A learner: a total step function over text items.
pub trait Learner<D> {
    type State: Clone;
    type Hyp: Clone + PartialEq + fmt::Debug;

    fn name(&self) -> &str;
    fn initial(&self) -> Self::State;
    /// Conjecture on the empty input.
    fn initial_hypothesis(&self) -> Self::Hyp;
    fn step(&self, state: &Self::State, item: &TextItem<D>) -> Result<(Self::State, Self::Hyp), LearnerError>;

    /// Conjecture after each item of `items`, starting from the initial state.
    fn run(&self, items: &[TextItem<D>]) -> Result<Vec<Self::Hyp>, LearnerError> {
        let mut state = self.initial();
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            let (next, hyp) = self.step(&state, item)?;
            state = next;
            out.push(hyp);
        }
        Ok(out)
    }

    /// Final conjecture on `items`.
    fn conjecture(&self, items: &[TextItem<D>]) -> Result<Self::Hyp, LearnerError> {
        Ok(self.run(items)?.pop().unwrap_or_else(|| self.initial_hypothesis()))
    }
}

/// Comparison of hypotheses by the sets they denote.
pub trait Semantic {
    fn semantic_eq(&self, other: &Self) -> SemanticVerdict;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisKind {
    /// Representations of elements of `<q/m>`.
    Subgroup {
        spec: SubgroupSpec,
    },
    /// Representations whose value is congruent modulo 1 to a member of `<q/m>`.
    Mod1Subgroup {
        spec: SubgroupSpec,
    },
    /// Representations whose value modulo 1 lies in the listed residues.
    Mod1Residues {
        residues: BTreeSet<Rational>,
    },
    /// Complement of the equality relation with `b_d = 0` for `d < pivot`,
    /// `b_pivot` as unit and `b_d = ratio_d * b_pivot` for the listed `d`.
    EqualityComplement {
        pivot: usize,
        #[serde(with = "ratio_pairs")]
        ratios: BTreeMap<usize, Rational>,
    },
    /// The complement of `G_{s0}` for the subgroup `<q/m>` of a subring.
    CoReComplement {
        spec: SubgroupSpec,
        s0: usize,
    },
    Empty,
}

/// Ratios as `[d, ratio]` pairs, since JSON object keys are strings.
mod ratio_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::qarith::Rational;

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<usize, Rational>, D::Error> {
        Ok(Vec::<(usize, Rational)>::deserialize(deserializer)?.into_iter().collect())
    }
}

/// A conjecture: what it denotes plus the handle a learner emitted for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub kind: HypothesisKind,
    pub handle: String,
}

impl Hypothesis {
    pub fn new(kind: HypothesisKind, handle: impl Into<String>) -> Self {
        Self { kind, handle: handle.into() }
    }

    /// Hypothesis whose handle is its canonical description.
    pub fn canonical(kind: HypothesisKind) -> Self {
        let handle = match &kind {
            HypothesisKind::Subgroup { spec } => format!("subgroup:{spec}"),
            HypothesisKind::Mod1Subgroup { spec } => format!("mod1:{spec}"),
            HypothesisKind::Mod1Residues { residues } => {
                let r: Vec<String> = residues.iter().map(|r| r.to_string()).collect();
                format!("residues:{{{}}}", r.join(","))
            }
            HypothesisKind::EqualityComplement { pivot, ratios } => {
                let r: Vec<String> = ratios.iter().map(|(d, q)| format!("{d}={q}")).collect();
                format!("neq:{pivot}:{}", r.join(","))
            }
            HypothesisKind::CoReComplement { spec, s0 } => format!("cogen:{spec}:{s0}"),
            HypothesisKind::Empty => "empty".to_string(),
        };
        Self { kind, handle }
    }

    /// The subgroup spec of subgroup-like kinds.
    pub fn spec(&self) -> Option<&SubgroupSpec> {
        match &self.kind {
            HypothesisKind::Subgroup { spec }
            | HypothesisKind::Mod1Subgroup { spec }
            | HypothesisKind::CoReComplement { spec, .. } => Some(spec),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticVerdict {
    Equal,
    Different,
    Incomparable(String),
}

impl SemanticVerdict {
    pub fn holds(&self) -> bool {
        *self == SemanticVerdict::Equal
    }

    fn from_bool(b: bool) -> Self {
        if b {
            SemanticVerdict::Equal
        } else {
            SemanticVerdict::Different
        }
    }
}

/// Residues `{0, 1/m, ..., (m-1)/m}` of `<q/m> + Z`.
pub fn mod1_residues(spec: &SubgroupSpec) -> BTreeSet<Rational> {
    if spec.is_trivial() {
        return BTreeSet::from([Rational::zero()]);
    }
    let m = num_bigint::BigInt::from(spec.m().clone());
    let mut out = BTreeSet::new();
    let mut k = num_bigint::BigInt::from(0);
    while k < m {
        out.insert(Rational::new(k.clone(), m.clone()).expect("m positive"));
        k += 1;
    }
    out
}

/// Default census bound for comparing equality hypotheses.
pub const EQUALITY_CENSUS_BOUND: usize = 3;

/// [`semantic_eq_within`] at [`EQUALITY_CENSUS_BOUND`].
pub fn semantic_eq(h1: &Hypothesis, h2: &Hypothesis) -> SemanticVerdict {
    semantic_eq_within(h1, h2, EQUALITY_CENSUS_BOUND)
}

/// Subgroup kinds compare by reduced spec, mod-1 kinds by residue sets, and
/// equality complements by the partition they induce on the census window of
/// the given bound.
pub fn semantic_eq_within(h1: &Hypothesis, h2: &Hypothesis, census_bound: usize) -> SemanticVerdict {
    use HypothesisKind::*;
    match (&h1.kind, &h2.kind) {
        (Subgroup { spec: a }, Subgroup { spec: b })
        | (CoReComplement { spec: a, .. }, CoReComplement { spec: b, .. })
        | (Subgroup { spec: a }, CoReComplement { spec: b, .. })
        | (CoReComplement { spec: a, .. }, Subgroup { spec: b }) => SemanticVerdict::from_bool(a == b),
        (Mod1Subgroup { .. } | Mod1Residues { .. }, Mod1Subgroup { .. } | Mod1Residues { .. }) => {
            SemanticVerdict::from_bool(residues_of(&h1.kind) == residues_of(&h2.kind))
        }
        (EqualityComplement { .. }, EqualityComplement { .. }) => {
            let window = VectorWindow::new(census_bound);
            let key = |h: &HypothesisKind, v: &Representation| equality_key(h, v);
            let vs = window.vectors();
            let same = vs.iter().enumerate().all(|(i, a)| {
                let (ka, kb) = (key(&h1.kind, a), key(&h2.kind, a));
                vs[i + 1..].iter().all(|b| (ka == key(&h1.kind, b)) == (kb == key(&h2.kind, b)))
            });
            SemanticVerdict::from_bool(same)
        }
        (Empty, Empty) => SemanticVerdict::Equal,
        (a, b) => SemanticVerdict::Incomparable(format!("cannot compare {} with {}", kind_name(a), kind_name(b))),
    }
}

fn kind_name(k: &HypothesisKind) -> &'static str {
    match k {
        HypothesisKind::Subgroup { .. } => "subgroup",
        HypothesisKind::Mod1Subgroup { .. } => "mod1_subgroup",
        HypothesisKind::Mod1Residues { .. } => "mod1_residues",
        HypothesisKind::EqualityComplement { .. } => "equality_complement",
        HypothesisKind::CoReComplement { .. } => "core_complement",
        HypothesisKind::Empty => "empty",
    }
}

fn residues_of(k: &HypothesisKind) -> BTreeSet<Rational> {
    match k {
        HypothesisKind::Mod1Subgroup { spec } => mod1_residues(spec),
        HypothesisKind::Mod1Residues { residues } => residues.clone(),
        _ => BTreeSet::new(),
    }
}

/// Class key of `v` under an equality-complement hypothesis: the value
/// under the reconstructed ratios, plus the coefficients at positions with
/// no known ratio (those only match coefficient for coefficient).
fn equality_key(h: &HypothesisKind, v: &Representation) -> (Rational, Vec<(usize, i64)>) {
    let HypothesisKind::EqualityComplement { pivot, ratios } = h else {
        return (Rational::zero(), Vec::new());
    };
    let mut value = Rational::zero();
    let mut free = Vec::new();
    for (i, &c) in v.entries().iter().enumerate() {
        if c == 0 || i < *pivot {
            continue;
        }
        if i == *pivot {
            value += &Rational::integer(c);
        } else if let Some(r) = ratios.get(&i) {
            value += &r.scale(c);
        } else {
            free.push((i, c));
        }
    }
    (value, free)
}

/// The inequality relation of `beta` as an equality-complement hypothesis.
pub fn equality_truth(beta: &[Rational]) -> Hypothesis {
    let pivot = beta.iter().position(|b| !b.is_zero()).unwrap_or(beta.len());
    let ratios = match beta.get(pivot) {
        Some(b) => {
            let inv = Rational::from(b.inner().recip());
            (pivot + 1..beta.len()).map(|d| (d, &beta[d] * &inv)).collect()
        }
        None => BTreeMap::new(),
    };
    Hypothesis::canonical(HypothesisKind::EqualityComplement { pivot, ratios })
}

impl HypothesisKind {
    /// Whether `(sigma, tau)` is an equal pair under an equality-complement
    /// hypothesis (always false for other kinds).
    pub fn asserts_equal(&self, sigma: &Representation, tau: &Representation) -> bool {
        matches!(self, HypothesisKind::EqualityComplement { .. })
            && equality_key(self, sigma) == equality_key(self, tau)
    }
}

impl Semantic for Hypothesis {
    fn semantic_eq(&self, other: &Self) -> SemanticVerdict {
        semantic_eq(self, other)
    }
}
