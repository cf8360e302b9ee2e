use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::{Hypothesis, HypothesisKind, Learner, LearnerError, TextItem};
use crate::qarith::{as_unit_prime_power, nth_prime, repr_value, Rational, Representation, SubgroupSpec};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BcState {
    pub steps: usize,
    /// gcd of the positive singleton data `(w)` seen so far.
    pub numerator: Option<BigInt>,
    /// Coefficients `c` of the single-entry data `I_{j+1}(c)`, by position.
    pub singles: BTreeMap<usize, BTreeSet<BigInt>>,
}

fn default_hypothesis(steps: usize) -> Hypothesis {
    Hypothesis::new(HypothesisKind::Subgroup { spec: SubgroupSpec::integers() }, format!("bc[{steps}]:default"))
}

/// Denominator guess: for each position `j` with `beta(j) = p^{-h'}` and
/// `p` coprime to the numerator guess `q'`, the least `h <= h'` with
/// `I_{j+1}(q' * p^h)` seen contributes `p^{h' - h}`.
fn denominator(q: &BigInt, singles: &BTreeMap<usize, BTreeSet<BigInt>>, beta: &[Rational]) -> BigInt {
    let mut m = BigInt::one();
    for (j, cs) in singles {
        let Some((i, top)) = beta.get(*j).and_then(as_unit_prime_power) else { continue };
        let p = BigInt::from(nth_prime(i));
        if !q.gcd(&p).is_one() {
            continue;
        }
        if let Some(h) = (0..=top).find(|&h| cs.contains(&(q * p.pow(h)))) {
            m *= p.pow(top - h);
        }
    }
    m
}

/// One step of the behaviourally correct learner for finitely generated
/// subgroups over `beta`.
///
/// The handle records the step, so consecutive correct conjectures are
/// semantically equal but syntactically distinct.
pub fn bc_learner_step(state: &BcState, item: &TextItem<Representation>, beta: &[Rational]) -> (BcState, Hypothesis) {
    let mut next = state.clone();
    next.steps += 1;
    if let Some((j, c)) = item.datum().and_then(Representation::single_entry) {
        let c = BigInt::from(c);
        if j == 0 && c.is_positive() {
            next.numerator = Some(next.numerator.as_ref().map_or(c.clone(), |g| g.gcd(&c)));
        }
        next.singles.entry(j).or_default().insert(c);
    }
    let Some(q) = next.numerator.clone() else {
        return (next.clone(), default_hypothesis(next.steps));
    };
    let m = denominator(&q, &next.singles, beta);
    let spec = SubgroupSpec::reduced(q.magnitude().clone(), m.magnitude().clone()).expect("q positive");
    let hyp = Hypothesis::new(HypothesisKind::Subgroup { spec: spec.clone() }, format!("bc[{}]:{spec}", next.steps));
    (next, hyp)
}

/// The behaviourally correct learner, reading `beta` from the builder.
#[derive(Debug, Clone)]
pub struct BcLearner {
    pub beta: Vec<Rational>,
}

impl BcLearner {
    pub fn new(beta: Vec<Rational>) -> Self {
        Self { beta }
    }
}

impl Learner<Representation> for BcLearner {
    type State = BcState;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "bc"
    }

    fn initial(&self) -> BcState {
        BcState::default()
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        default_hypothesis(0)
    }

    fn step(&self, state: &BcState, item: &TextItem<Representation>) -> Result<(BcState, Hypothesis), LearnerError> {
        Ok(bc_learner_step(state, item, &self.beta))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mod1BcState {
    pub steps: usize,
    pub residues: BTreeSet<Rational>,
}

fn residue_hypothesis(residues: &BTreeSet<Rational>, steps: usize) -> Hypothesis {
    let kind = HypothesisKind::Mod1Residues { residues: residues.clone() };
    let base = Hypothesis::canonical(kind);
    Hypothesis::new(base.kind, format!("mod1bc[{steps}]:{}", base.handle))
}

/// One step of the modulo-1 learner: the conjecture is the closure of the
/// data under equality modulo 1, given by the residues of their values.
pub fn mod1_bc_learner_step(
    state: &Mod1BcState,
    item: &TextItem<Representation>,
    beta: &[Rational],
) -> (Mod1BcState, Hypothesis) {
    let mut next = state.clone();
    next.steps += 1;
    if let Some(sigma) = item.datum() {
        let len = sigma.support_len();
        if len <= beta.len() {
            let head = Representation::new(sigma.entries()[..len].to_vec());
            let x = repr_value(&head, beta).expect("length checked");
            next.residues.insert(x.mod_one());
        }
    }
    let hyp = residue_hypothesis(&next.residues, next.steps);
    (next, hyp)
}

#[derive(Debug, Clone)]
pub struct Mod1BcLearner {
    pub beta: Vec<Rational>,
}

impl Mod1BcLearner {
    pub fn new(beta: Vec<Rational>) -> Self {
        Self { beta }
    }
}

impl Learner<Representation> for Mod1BcLearner {
    type State = Mod1BcState;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "mod1bc"
    }

    fn initial(&self) -> Mod1BcState {
        Mod1BcState::default()
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        residue_hypothesis(&BTreeSet::new(), 0)
    }

    fn step(
        &self,
        state: &Mod1BcState,
        item: &TextItem<Representation>,
    ) -> Result<(Mod1BcState, Hypothesis), LearnerError> {
        Ok(mod1_bc_learner_step(state, item, &self.beta))
    }
}
