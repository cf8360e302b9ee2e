use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::{Hypothesis, HypothesisKind, Learner, LearnerError, TextItem};
use crate::qarith::{repr_value, Rational, Representation, SubgroupSpec};

/// Exact equality of representations, as a halting-problem oracle would
/// decide it for a sequence whose equality is only co-r.e.
pub trait EqualityOracle {
    fn equal(&self, sigma: &Representation, tau: &Representation) -> Result<bool, LearnerError>;

    /// Coprime `(i, j)` with `i > 0` and `i * (sigma . beta) = j * (tau . beta)`,
    /// for `tau . beta != 0`.
    fn relation(&self, sigma: &Representation, tau: &Representation) -> Result<(BigInt, BigInt), LearnerError>;
}

/// Oracle answering from the final sequence known to the harness.
#[derive(Debug, Clone)]
pub struct GroundTruthOracle {
    pub beta: Vec<Rational>,
}

impl GroundTruthOracle {
    pub fn new(beta: Vec<Rational>) -> Self {
        Self { beta }
    }

    fn value(&self, sigma: &Representation, other: &Representation) -> Result<Rational, LearnerError> {
        let len = sigma.support_len();
        if len > self.beta.len() {
            return Err(LearnerError::OracleRefused {
                sigma: sigma.clone(),
                tau: other.clone(),
                reason: format!("representation of length {len} exceeds the known sequence ({})", self.beta.len()),
            });
        }
        Ok(repr_value(&Representation::new(sigma.entries()[..len].to_vec()), &self.beta).expect("length checked"))
    }
}

impl EqualityOracle for GroundTruthOracle {
    fn equal(&self, sigma: &Representation, tau: &Representation) -> Result<bool, LearnerError> {
        Ok(self.value(sigma, tau)? == self.value(tau, sigma)?)
    }

    fn relation(&self, sigma: &Representation, tau: &Representation) -> Result<(BigInt, BigInt), LearnerError> {
        let (a, b) = (self.value(sigma, tau)?, self.value(tau, sigma)?);
        if b.is_zero() {
            return Err(LearnerError::OracleRefused {
                sigma: sigma.clone(),
                tau: tau.clone(),
                reason: "second argument has value 0".into(),
            });
        }
        // i * a = j * b with j / i = a / b.
        let r = &a * &Rational::from(b.inner().recip());
        Ok((r.denom().clone(), r.numer().clone()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExkState {
    pub steps: usize,
    /// `(v, D)`: the current generator is `(v . beta) / D`.
    pub rho: Option<(Representation, BigInt)>,
}

fn placeholder() -> Hypothesis {
    Hypothesis::canonical(HypothesisKind::Subgroup { spec: SubgroupSpec::trivial() })
}

/// One step of the learner with an equality oracle.
///
/// The first nonzero datum `v` seeds the generator `v . beta`. Each later
/// datum `a` with `i * (v . beta) = j * (a . beta)` refines the divisor `D`
/// so that `(v . beta) / D` generates both. The conjecture is the reduced
/// generator, so the output is constant once all of a generating set has
/// been seen.
pub fn exk_learner_step(
    state: &ExkState,
    item: &TextItem<Representation>,
    oracle: &dyn EqualityOracle,
) -> Result<(ExkState, Hypothesis), LearnerError> {
    let mut next = state.clone();
    next.steps += 1;
    let zero = Representation::new(Vec::new());
    if let Some(a) = item.datum() {
        if !oracle.equal(a, &zero)? {
            next.rho = Some(match next.rho.take() {
                None => (a.clone(), BigInt::one()),
                Some((v, d)) => {
                    let (i, j) = oracle.relation(&v, a)?;
                    let (i, j) = (i.abs(), j.abs());
                    let factor = &j / (&i * &d).gcd(&j);
                    (v, d * factor)
                }
            });
        }
    }
    let Some((v, d)) = &next.rho else {
        return Ok((next.clone(), placeholder()));
    };
    let (i, j) = oracle.relation(v, &Representation::unit(1, 1))?;
    let spec = SubgroupSpec::reduced(j.magnitude().clone(), (i.abs() * d).magnitude().clone()).expect("nonzero");
    Ok((next, Hypothesis::canonical(HypothesisKind::Subgroup { spec })))
}

/// The learner with its oracle; the oracle sees the ground truth, not the text.
pub struct ExkLearner<O: EqualityOracle> {
    pub oracle: O,
}

impl<O: EqualityOracle> ExkLearner<O> {
    pub fn new(oracle: O) -> Self {
        Self { oracle }
    }
}

impl<O: EqualityOracle> Learner<Representation> for ExkLearner<O> {
    type State = ExkState;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "exk"
    }

    fn initial(&self) -> ExkState {
        ExkState::default()
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        placeholder()
    }

    fn step(&self, state: &ExkState, item: &TextItem<Representation>) -> Result<(ExkState, Hypothesis), LearnerError> {
        exk_learner_step(state, item, &self.oracle)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EqClassState {
    pub steps: usize,
    /// Positions `d` with `(0, I_{d+1}(1))` seen.
    pub zeros: BTreeSet<usize>,
    /// `(e, d) -> beta(d) / beta(e)` from pairs `(I_{e+1}(q), I_{d+1}(r))`.
    pub ratios: BTreeMap<(usize, usize), Rational>,
}

impl EqClassState {
    pub fn pivot(&self) -> usize {
        (0..).find(|e| !self.zeros.contains(e)).expect("finitely many zeros")
    }
}

fn eq_hypothesis(state: &EqClassState) -> Hypothesis {
    let pivot = state.pivot();
    let mut ratios = BTreeMap::new();
    for &d in state.zeros.iter().filter(|&&d| d > pivot) {
        ratios.insert(d, Rational::zero());
    }
    for (&(e, d), r) in &state.ratios {
        if e == pivot && d != pivot {
            ratios.insert(d, r.clone());
        } else if d == pivot && e != pivot && !r.is_zero() {
            ratios.insert(e, Rational::from(r.inner().recip()));
        }
    }
    Hypothesis::canonical(HypothesisKind::EqualityComplement { pivot, ratios })
}

/// One step of the learner for the inequality relation from pairs of equal
/// representations.
///
/// The pivot guess `e` is the least position not yet shown equal to 0, and
/// ratios `beta(d) / beta(e)` are read off pairs of single-entry vectors.
/// Positions with no known ratio are conjectured to differ from everything
/// except identical coefficients.
pub fn equality_class_learner_step(
    state: &EqClassState,
    item: &TextItem<(Representation, Representation)>,
) -> (EqClassState, Hypothesis) {
    let mut next = state.clone();
    next.steps += 1;
    if let Some((s, t)) = item.datum() {
        match (s.single_entry(), t.single_entry()) {
            (None, Some((d, 1))) if s.is_zero_vector() => {
                next.zeros.insert(d);
            }
            (Some((d, 1)), None) if t.is_zero_vector() => {
                next.zeros.insert(d);
            }
            (Some((e, q)), Some((d, r))) if e != d => {
                // q * beta(e) = r * beta(d).
                next.ratios.insert((e, d), Rational::new(q, r).expect("nonzero entry"));
            }
            _ => {}
        }
    }
    let hyp = eq_hypothesis(&next);
    (next, hyp)
}

#[derive(Debug, Clone, Default)]
pub struct EqClassLearner;

impl Learner<(Representation, Representation)> for EqClassLearner {
    type State = EqClassState;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "eqclass"
    }

    fn initial(&self) -> EqClassState {
        EqClassState::default()
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        eq_hypothesis(&EqClassState::default())
    }

    fn step(
        &self,
        state: &EqClassState,
        item: &TextItem<(Representation, Representation)>,
    ) -> Result<(EqClassState, Hypothesis), LearnerError> {
        Ok(equality_class_learner_step(state, item))
    }
}
