use super::{Hypothesis, HypothesisKind, Learner, LearnerError, TextItem};
use crate::genseq::GenSeqState;
use crate::qarith::{in_span, reduce_generator, Rational, Representation, SubgroupSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubringState {
    pub steps: usize,
    pub seen: Vec<Representation>,
    pub hypothesis: Hypothesis,
}

impl Default for SubringState {
    fn default() -> Self {
        Self { steps: 0, seen: Vec::new(), hypothesis: Hypothesis::canonical(HypothesisKind::Empty) }
    }
}

/// Value of `sigma` under the first snapshot at or after stage `n` that is
/// long enough, or under the last snapshot.
fn approx_value(run: &[GenSeqState], n: usize, sigma: &Representation) -> Option<Rational> {
    let from = n.min(run.len().checked_sub(1)?);
    run[from..].iter().find_map(|st| st.value(sigma))
}

/// Whether a datum is outside the set the hypothesis denotes.
fn contradicts(run: &[GenSeqState], n: usize, h: &Hypothesis, sigma: &Representation) -> bool {
    match &h.kind {
        HypothesisKind::CoReComplement { spec, .. } | HypothesisKind::Subgroup { spec } => {
            approx_value(run, n, sigma).is_some_and(|x| !in_span(&x, spec))
        }
        HypothesisKind::Empty => true,
        _ => false,
    }
}

/// Least `s0` such that no seen datum is found outside `<spec>` at a stage
/// in `s0..=n`.
fn least_s0(run: &[GenSeqState], n: usize, spec: &SubgroupSpec, seen: &[Representation]) -> usize {
    let last = n.min(run.len().saturating_sub(1));
    (0..=last)
        .rev()
        .find(|&t| {
            let st = &run[t];
            seen.iter().any(|s| st.committed.admits(s) && st.value(s).is_some_and(|x| !in_span(&x, spec)))
        })
        .map_or(0, |t| t + 1)
}

/// One step of the conservative learner for subgroups of a subring.
///
/// The conjecture changes only when a seen datum lies outside it. The new
/// generator is the one of the data values, read off the earliest snapshot
/// at or after the current step that covers each datum, and `s0` is chosen
/// least with no datum found outside the subgroup from stage `s0` on.
pub fn subring_ex_learner_step(
    state: &SubringState,
    item: &TextItem<Representation>,
    run: &[GenSeqState],
) -> (SubringState, Hypothesis) {
    let mut next = state.clone();
    let n = next.steps;
    next.steps += 1;
    let Some(sigma) = item.datum() else {
        let h = next.hypothesis.clone();
        return (next, h);
    };
    next.seen.push(sigma.clone());
    if !contradicts(run, n, &next.hypothesis, sigma) {
        let h = next.hypothesis.clone();
        return (next, h);
    }
    let values: Vec<Rational> = next.seen.iter().filter_map(|s| approx_value(run, n, s)).collect();
    if let Ok(spec) = reduce_generator(&values) {
        let s0 = least_s0(run, n, &spec, &next.seen);
        next.hypothesis = Hypothesis::canonical(HypothesisKind::CoReComplement { spec, s0 });
    }
    let h = next.hypothesis.clone();
    (next, h)
}

/// The conservative learner, reading stage approximations from a subring run.
#[derive(Debug, Clone, Copy)]
pub struct SubringExLearner<'a> {
    pub run: &'a [GenSeqState],
}

impl<'a> SubringExLearner<'a> {
    pub fn new(run: &'a [GenSeqState]) -> Self {
        Self { run }
    }
}

impl Learner<Representation> for SubringExLearner<'_> {
    type State = SubringState;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "subring-ex"
    }

    fn initial(&self) -> SubringState {
        SubringState::default()
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        SubringState::default().hypothesis
    }

    fn step(
        &self,
        state: &SubringState,
        item: &TextItem<Representation>,
    ) -> Result<(SubringState, Hypothesis), LearnerError> {
        Ok(subring_ex_learner_step(state, item, self.run))
    }
}
