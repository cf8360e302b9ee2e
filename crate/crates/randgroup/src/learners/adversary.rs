use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{canonical_text, Hypothesis, Learner, LearnerError, Semantic, TextItem, TextTarget};
use crate::bitstream::ExponentProfile;
use crate::genseq::{GenSeqState, VectorWindow};
use crate::qarith::{nth_prime, repr_value, Rational, Representation, SubgroupSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// Conjectures must be identical.
    Syntactic,
    /// Conjectures must denote the same set.
    Semantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustionReason {
    BudgetSpent,
    SearchSpaceExhausted,
}

fn same<H: Clone + PartialEq + Semantic>(a: &H, b: &H, mode: StabilityMode) -> bool {
    match mode {
        StabilityMode::Syntactic => a == b,
        StabilityMode::Semantic => a.semantic_eq(b).holds(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilisingSearch<D> {
    Found {
        sequence: Vec<TextItem<D>>,
        steps: usize,
    },
    NotFound {
        /// The last candidate together with the extension that moved the learner.
        last_counterexample: Option<(Vec<TextItem<D>>, TextItem<D>)>,
        steps: usize,
        reason: ExhaustionReason,
    },
}

/// Searches the prefixes of `base`, shortest first, for one after which no
/// single item of `extensions` changes the conjecture.
///
/// `budget` bounds the number of learner steps.
pub fn find_stabilising_sequence<D, L>(
    learner: &L,
    base: &[TextItem<D>],
    extensions: &[TextItem<D>],
    mode: StabilityMode,
    budget: usize,
) -> Result<StabilisingSearch<D>, LearnerError>
where
    D: Clone,
    L: Learner<D>,
    L::Hyp: Semantic,
{
    let mut steps = 0;
    let mut state = learner.initial();
    let mut hyp = learner.initial_hypothesis();
    let mut last = None;
    for k in 0..=base.len() {
        let mut moved = None;
        for ext in extensions {
            if steps >= budget {
                return Ok(StabilisingSearch::NotFound {
                    last_counterexample: last,
                    steps,
                    reason: ExhaustionReason::BudgetSpent,
                });
            }
            steps += 1;
            let (_, h) = learner.step(&state, ext)?;
            if !same(&hyp, &h, mode) {
                moved = Some(ext.clone());
                break;
            }
        }
        match moved {
            None => return Ok(StabilisingSearch::Found { sequence: base[..k].to_vec(), steps }),
            Some(ext) => last = Some((base[..k].to_vec(), ext)),
        }
        if k < base.len() {
            if steps >= budget {
                break;
            }
            steps += 1;
            let (s, h) = learner.step(&state, &base[k])?;
            state = s;
            hyp = h;
        }
    }
    let reason = if steps >= budget { ExhaustionReason::BudgetSpent } else { ExhaustionReason::SearchSpaceExhausted };
    Ok(StabilisingSearch::NotFound { last_counterexample: last, steps, reason })
}

/// A mind change of the learner on `gamma` extended by `delta`, with all
/// data of `delta` taken from `Z_beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MindChangeWitness<H> {
    pub gamma: Vec<TextItem<Representation>>,
    pub delta: Vec<TextItem<Representation>>,
    pub before: H,
    pub after: H,
}

impl<H: Clone + PartialEq + std::fmt::Debug> MindChangeWitness<H> {
    /// Re-runs the learner and checks that it reproduces both conjectures.
    pub fn replays<L: Learner<Representation, Hyp = H>>(&self, learner: &L) -> Result<bool, LearnerError> {
        let before = learner.conjecture(&self.gamma)?;
        let mut full = self.gamma.clone();
        full.extend(self.delta.iter().cloned());
        let after = learner.conjecture(&full)?;
        Ok(before == self.before && after == self.after && before != after)
    }
}

/// Outcome of [`ex_adversary`]. This is evidence about the learner at the
/// given budget, not a proof of anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExAdversaryReport<H> {
    Witness {
        witness: MindChangeWitness<H>,
        steps: usize,
    },
    Exhausted {
        reason: ExhaustionReason,
        /// The stabilising sequence on `Z_beta`, if one was found.
        gamma: Option<Vec<TextItem<Representation>>>,
        /// Prime indices for which a mind change needed data outside `Z_beta`.
        justified_primes: Vec<usize>,
        steps: usize,
    },
}

const EX_BASE_TEXT: usize = 60;
const EX_DELTA_TEXT: usize = 24;
const EX_DELTA_LEN: usize = 2;

/// Plays the diagonal strategy against `learner` on the last snapshot of
/// an fgsub (or mod1) run.
///
/// A stabilising sequence `gamma` for the learner on `Z_beta` is searched
/// among prefixes of a text for `Z_beta`. If none exists, the last
/// counterexample is a mind change on `Z_beta` data and is reported.
/// Otherwise, for each prime `p` of the profile in increasing order,
/// extensions `delta` of length at most 2 over `<1/p>_beta` members and
/// pauses are tried; a mind change with every datum of `delta` in `Z_beta`
/// is a witness, one that needs other data is recorded as justified.
pub fn ex_adversary<L>(
    learner: &L,
    run: &[GenSeqState],
    budget: usize,
) -> Result<ExAdversaryReport<L::Hyp>, LearnerError>
where
    L: Learner<Representation>,
    L::Hyp: Semantic,
{
    let exhausted = |reason, gamma, justified_primes, steps| ExAdversaryReport::Exhausted {
        reason,
        gamma,
        justified_primes,
        steps,
    };
    if budget == 0 {
        return Ok(exhausted(ExhaustionReason::BudgetSpent, None, Vec::new(), 0));
    }
    let last = run.last().ok_or(LearnerError::EmptyTarget)?;
    let z = TextTarget::from_run(run, SubgroupSpec::integers()).ok_or(LearnerError::EmptyTarget)?;
    let base = canonical_text(&z, 0, EX_BASE_TEXT)?;
    let mut extensions: Vec<TextItem<Representation>> = base.members.iter().cloned().map(TextItem::Datum).collect();
    extensions.push(TextItem::Pause);

    let search = find_stabilising_sequence(learner, &base.items, &extensions, StabilityMode::Syntactic, budget)?;
    let (gamma, mut steps) = match search {
        StabilisingSearch::Found { sequence, steps } => (sequence, steps),
        StabilisingSearch::NotFound { last_counterexample: Some((gamma, ext)), steps, .. } => {
            let before = learner.conjecture(&gamma)?;
            let mut full = gamma.clone();
            full.push(ext.clone());
            let after = learner.conjecture(&full)?;
            let witness = MindChangeWitness { gamma, delta: vec![ext], before, after };
            return Ok(ExAdversaryReport::Witness { witness, steps });
        }
        StabilisingSearch::NotFound { last_counterexample: None, steps, reason } => {
            return Ok(exhausted(reason, None, Vec::new(), steps));
        }
    };

    let mut state = learner.initial();
    for item in &gamma {
        state = learner.step(&state, item)?.0;
    }
    let before = learner.conjecture(&gamma)?;
    let mut justified = Vec::new();
    for i in last.profile_view.nonzero_indices() {
        let spec = SubgroupSpec::generated_by(&Rational::unit_fraction(nth_prime(i), 1));
        let target = TextTarget::new(z.beta.clone(), spec, z.membership);
        let Ok(text) = canonical_text(&target, 0, EX_DELTA_TEXT) else { continue };
        let mut alphabet: Vec<TextItem<Representation>> = text.members.into_iter().map(TextItem::Datum).collect();
        alphabet.push(TextItem::Pause);
        // Breadth-first over sequences of length 1..=EX_DELTA_LEN.
        let mut frontier = vec![(Vec::new(), state.clone())];
        'prime: for _ in 0..EX_DELTA_LEN {
            let mut next_frontier = Vec::new();
            for (delta, st) in &frontier {
                for item in &alphabet {
                    if steps >= budget {
                        return Ok(exhausted(ExhaustionReason::BudgetSpent, Some(gamma), justified, steps));
                    }
                    steps += 1;
                    let (s2, h) = learner.step(st, item)?;
                    let mut d = delta.clone();
                    d.push(item.clone());
                    if h != before {
                        let inside = d.iter().filter_map(TextItem::datum).all(|x| z.contains(x));
                        if inside {
                            let witness = MindChangeWitness { gamma, delta: d, before, after: h };
                            return Ok(ExAdversaryReport::Witness { witness, steps });
                        }
                        justified.push(i);
                        break 'prime;
                    }
                    next_frontier.push((d, s2));
                }
            }
            frontier = next_frontier;
        }
    }
    Ok(exhausted(ExhaustionReason::SearchSpaceExhausted, Some(gamma), justified, steps))
}

/// Queryable membership of a pair in a conjectured equality relation.
pub trait PairConjecture {
    fn contains(&self, sigma: &Representation, tau: &Representation) -> bool;
}

impl PairConjecture for Hypothesis {
    fn contains(&self, sigma: &Representation, tau: &Representation) -> bool {
        self.kind.asserts_equal(sigma, tau)
    }
}

fn trim(v: &Representation) -> Representation {
    Representation::new(v.entries()[..v.support_len()].to_vec())
}

/// A finite or full set of pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSet {
    All,
    Listed(BTreeSet<(Representation, Representation)>),
}

impl PairConjecture for PairSet {
    fn contains(&self, sigma: &Representation, tau: &Representation) -> bool {
        match self {
            PairSet::All => true,
            PairSet::Listed(set) => {
                let (a, b) = (trim(sigma), trim(tau));
                a == b || set.contains(&(a.clone(), b.clone())) || set.contains(&(b, a))
            }
        }
    }
}

/// Conjectures that every pair is equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllEqualLearner;

impl Learner<(Representation, Representation)> for AllEqualLearner {
    type State = ();
    type Hyp = PairSet;

    fn name(&self) -> &str {
        "all-equal"
    }

    fn initial(&self) {}

    fn initial_hypothesis(&self) -> PairSet {
        PairSet::All
    }

    fn step(&self, _: &(), _: &TextItem<(Representation, Representation)>) -> Result<((), PairSet), LearnerError> {
        Ok(((), PairSet::All))
    }
}

/// Conjectures exactly the pairs seen so far.
#[derive(Debug, Clone, Copy, Default)]
pub struct SeenOnlyLearner;

impl Learner<(Representation, Representation)> for SeenOnlyLearner {
    type State = BTreeSet<(Representation, Representation)>;
    type Hyp = PairSet;

    fn name(&self) -> &str {
        "seen-only"
    }

    fn initial(&self) -> Self::State {
        BTreeSet::new()
    }

    fn initial_hypothesis(&self) -> PairSet {
        PairSet::Listed(BTreeSet::new())
    }

    fn step(
        &self,
        state: &Self::State,
        item: &TextItem<(Representation, Representation)>,
    ) -> Result<(Self::State, PairSet), LearnerError> {
        let mut next = state.clone();
        if let Some((a, b)) = item.datum() {
            next.insert((trim(a), trim(b)));
        }
        let hyp = PairSet::Listed(next.clone());
        Ok((next, hyp))
    }
}

/// One refuted conjecture: after `text_len` items the learner claimed
/// `sigma = tau` modulo 1, and the committed sequence makes them differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Falsification {
    pub stage: usize,
    pub sigma: Representation,
    pub tau: Representation,
    pub text_len: usize,
    pub beta_len: usize,
}

/// Outcome of [`bc_adversary`]; evidence at the given budget only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcAdversaryReport {
    pub falsifications: Vec<Falsification>,
    pub beta: Vec<Rational>,
    pub text: Vec<TextItem<(Representation, Representation)>>,
    pub steps: usize,
    /// `None` when every requested stage produced a falsification.
    pub exhausted: Option<ExhaustionReason>,
}

const SHAPE_WIDTH: usize = 8;
const GAMMA_BOX: usize = 2;

fn value(beta: &[Rational], v: &Representation) -> Rational {
    let len = v.support_len();
    repr_value(&Representation::new(v.entries()[..len].to_vec()), beta).expect("within the committed sequence")
}

/// Pairs of the box `{-2..2}^2` and of unit vectors `I_k(1)` that are equal
/// modulo 1 under `beta`.
fn equal_pairs(beta: &[Rational]) -> Vec<(Representation, Representation)> {
    let mut out = Vec::new();
    if beta.len() >= GAMMA_BOX {
        let window = VectorWindow::new(GAMMA_BOX);
        let vals: Vec<_> = window.vectors().iter().map(|v| value(beta, v).mod_one()).collect();
        for i in 0..window.len() {
            for j in i + 1..window.len() {
                if vals[i] == vals[j] {
                    out.push((trim(&window.vectors()[i]), trim(&window.vectors()[j])));
                }
            }
        }
    }
    for a in 1..=beta.len() {
        for b in a + 1..=beta.len() {
            if beta[a - 1].mod_one() == beta[b - 1].mod_one() {
                out.push((Representation::unit(a, 1), Representation::unit(b, 1)));
            }
        }
    }
    out
}

/// Next term of the auxiliary modulo-1 sequence: `1/p_j^{n_j}` for the
/// least selected `j` whose power is missing, or 0 once all are present.
fn aux_term(beta: &[Rational], profile: &ExponentProfile) -> Rational {
    profile
        .nonzero_indices()
        .map(|j| Rational::unit_fraction(nth_prime(j), profile.get(j)))
        .find(|x| !beta.contains(x))
        .unwrap_or_else(Rational::zero)
}

/// Plays the stage loop of the diagonal argument against a learner of
/// equality modulo 1 from pair texts.
///
/// At each stage the text so far is extended by `delta`, one of: nothing, a
/// pause, or the equal pairs of the box under the auxiliary sequence. If the
/// conjecture then contains a pair `(I_a(1), I_b(1))` with `|beta| < a < b`,
/// the sequence is committed with zeros at positions `a-1..=b-2`, `1/p` at
/// `b-1` and a fresh auxiliary term at `b`, which makes the pair unequal.
/// The stage ends by presenting the equal pairs of the new sequence.
pub fn bc_adversary<L>(
    learner: &L,
    profile: &ExponentProfile,
    stages: usize,
    budget: usize,
) -> Result<BcAdversaryReport, LearnerError>
where
    L: Learner<(Representation, Representation)>,
    L::Hyp: PairConjecture,
{
    let p = profile.nonzero_indices().next().unwrap_or(0);
    let inv_p = Rational::unit_fraction(nth_prime(p), 1);
    let mut beta = vec![Rational::one()];
    let mut text = Vec::new();
    let mut state = learner.initial();
    let mut steps = 0;
    let mut falsifications = Vec::new();
    let done = |falsifications, beta, text, steps, exhausted| BcAdversaryReport {
        falsifications,
        beta,
        text,
        steps,
        exhausted,
    };

    for stage in 0..stages {
        let lower = beta.len().max(GAMMA_BOX);
        let box_pairs: Vec<_> = equal_pairs(&beta[..beta.len().min(GAMMA_BOX)])
            .into_iter()
            .filter(|(a, b)| a.len() <= GAMMA_BOX && b.len() <= GAMMA_BOX)
            .map(TextItem::Datum)
            .collect();
        let candidates = [Vec::new(), vec![TextItem::Pause], box_pairs];
        let mut found = None;
        'delta: for delta in candidates {
            let mut st = state.clone();
            let mut hyp = None;
            for item in &delta {
                if steps >= budget {
                    return Ok(done(falsifications, beta, text, steps, Some(ExhaustionReason::BudgetSpent)));
                }
                steps += 1;
                let (s, h) = learner.step(&st, item)?;
                st = s;
                hyp = Some(h);
            }
            let hyp = match hyp {
                Some(h) if !delta.is_empty() => h,
                _ if text.is_empty() => learner.initial_hypothesis(),
                _ => learner.conjecture(&text)?,
            };
            for a in lower + 1..=lower + SHAPE_WIDTH {
                for b in a + 1..=lower + SHAPE_WIDTH {
                    if steps >= budget {
                        return Ok(done(falsifications, beta, text, steps, Some(ExhaustionReason::BudgetSpent)));
                    }
                    steps += 1;
                    let (s, t) = (Representation::unit(a, 1), Representation::unit(b, 1));
                    if hyp.contains(&s, &t) {
                        found = Some((delta, st, a, b));
                        break 'delta;
                    }
                }
            }
        }
        let Some((delta, st, a, b)) = found else {
            return Ok(done(falsifications, beta, text, steps, Some(ExhaustionReason::SearchSpaceExhausted)));
        };
        text.extend(delta);
        state = st;
        falsifications.push(Falsification {
            stage,
            sigma: Representation::unit(a, 1),
            tau: Representation::unit(b, 1),
            text_len: text.len(),
            beta_len: b + 1,
        });
        while beta.len() < a - 1 {
            let x = aux_term(&beta, profile);
            beta.push(x);
        }
        beta.resize(b - 1, Rational::zero());
        beta.push(inv_p.clone());
        let x = aux_term(&beta, profile);
        beta.push(x);
        for pair in equal_pairs(&beta) {
            if steps >= budget {
                return Ok(done(falsifications, beta, text, steps, Some(ExhaustionReason::BudgetSpent)));
            }
            steps += 1;
            let item = TextItem::Datum(pair);
            state = learner.step(&state, &item)?.0;
            text.push(item);
        }
    }
    Ok(done(falsifications, beta, text, steps, None))
}

/// Whether `(sigma, tau)` is unequal modulo 1 under `beta`.
pub fn refutes(beta: &[Rational], sigma: &Representation, tau: &Representation) -> bool {
    sigma.support_len() <= beta.len()
        && tau.support_len() <= beta.len()
        && value(beta, sigma).mod_one() != value(beta, tau).mod_one()
}
