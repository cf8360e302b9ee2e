use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use randgroup::bitstream::{ApproximationSchedule, ExponentProfile};
use randgroup::genseq::{run_builder, GenSeqState, Variant};
use randgroup::learners::{
    bc_adversary, canonical_text, equality_truth, ex_adversary, find_stabilising_sequence, mod1_residues, pair_text,
    refutes, semantic_eq, AllEqualLearner, BcLearner, EqClassLearner, ExAdversaryReport, ExhaustionReason, ExkLearner,
    GroundTruthOracle, Hypothesis, HypothesisKind, Learner, LearnerError, Mod1BcLearner, PairConjecture,
    SeenOnlyLearner, SemanticVerdict, StabilisingSearch, StabilityMode, SubringExLearner, TextItem, TextTarget,
};
use randgroup::qarith::{in_span, Rational, Representation, SubgroupSpec};

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn r(v: &[i64]) -> Representation {
    Representation::new(v.to_vec())
}

fn spec(s: &str) -> SubgroupSpec {
    s.parse().unwrap()
}

fn d(v: &[i64]) -> TextItem<Representation> {
    TextItem::Datum(r(v))
}

fn subgroup(s: &str) -> Hypothesis {
    Hypothesis::canonical(HypothesisKind::Subgroup { spec: spec(s) })
}

fn fgsub(exps: &[u32], budget: usize) -> Vec<GenSeqState> {
    let sch = ApproximationSchedule::constant(ExponentProfile::new(exps.to_vec()).encode());
    run_builder(Variant::Fgsub, &sch, None, budget).unwrap()
}

fn last_beta(run: &[GenSeqState]) -> Vec<Rational> {
    run.last().unwrap().beta.clone()
}

/// Whether `h` denotes `<target>`.
fn denotes(h: &Hypothesis, target: &SubgroupSpec) -> bool {
    h.spec().is_some_and(|s| s == target)
}

#[test]
fn bc_defaults_to_the_integers() {
    let bc = BcLearner::new(vec![q("1"), q("1/4")]);
    assert!(denotes(&bc.initial_hypothesis(), &SubgroupSpec::integers()));
    let hs = bc.run(&[TextItem::Pause, d(&[0, 2])]).unwrap();
    assert!(hs.iter().all(|h| denotes(h, &SubgroupSpec::integers())));
}

/// Data (2) and (0, 2) over `(1, 1/4)`: the numerator guess is 2, and
/// position 1 carries a power of 2, which divides the guess, so it gives no
/// denominator factor. Once (1) is seen the guess drops to 1 and (0, 2)
/// witnesses the factor 2.
#[test]
fn bc_worked_text_for_one_half() {
    let bc = BcLearner::new(vec![q("1"), q("1/4")]);
    let hs = bc.run(&[d(&[2]), d(&[0, 2]), d(&[1])]).unwrap();
    assert!(denotes(&hs[0], &spec("2")));
    assert!(denotes(&hs[1], &spec("2")));
    assert!(denotes(&hs[2], &spec("1/2")));
}

#[test]
fn bc_integer_generator() {
    let bc = BcLearner::new(vec![q("1"), q("1/4"), q("1/3")]);
    let hs = bc.run(&[d(&[6]), d(&[9]), d(&[0, 12]), d(&[-3])]).unwrap();
    assert!(denotes(hs.last().unwrap(), &spec("3")));
}

#[test]
fn bc_handles_are_fresh() {
    let bc = BcLearner::new(vec![q("1")]);
    let hs = bc.run(&[d(&[1]), d(&[1])]).unwrap();
    assert_ne!(hs[0], hs[1]);
    assert!(semantic_eq(&hs[0], &hs[1]).holds());
}

fn prefix_converges<F: Fn(&Hypothesis) -> bool>(hs: &[Hypothesis], ok: F) -> Option<usize> {
    let n0 = hs.iter().rposition(|h| !ok(h)).map_or(0, |i| i + 1);
    (n0 < hs.len()).then_some(n0)
}

#[test]
fn bc_converges_semantically_on_canonical_texts() {
    let run = fgsub(&[3, 1, 1, 1], 64);
    let beta = last_beta(&run);
    for s in ["1", "1/2", "3/4", "1/8", "5/6", "2/3", "7"] {
        let target = spec(s);
        let text = canonical_text(&TextTarget::from_run(&run, target.clone()).unwrap(), 0, 200).unwrap();
        let hs = BcLearner::new(beta.clone()).run(&text.items).unwrap();
        let n0 = prefix_converges(&hs, |h| denotes(h, &target)).unwrap_or_else(|| panic!("no convergence for {s}"));
        assert!(n0 <= 100, "{s}: n0 = {n0}");
    }
}

#[test]
fn mod1_examples() {
    let beta = vec![q("1"), q("1/4")];
    let l = Mod1BcLearner::new(beta);
    let h = l.run(&[d(&[0, 1])]).unwrap().pop().unwrap();
    assert_eq!(h.kind, HypothesisKind::Mod1Residues { residues: BTreeSet::from([q("1/4")]) });
    let paused = l.run(&[TextItem::Pause, TextItem::Pause]).unwrap().pop().unwrap();
    assert_eq!(paused.kind, HypothesisKind::Mod1Residues { residues: BTreeSet::new() });
    let target = Hypothesis::canonical(HypothesisKind::Mod1Subgroup { spec: spec("1/4") });
    let text = [d(&[0, 1]), d(&[3]), d(&[0, 2]), d(&[1, 3]), d(&[0, 5]), TextItem::Pause, d(&[2, 6])];
    let hs = l.run(&text).unwrap();
    assert!(!semantic_eq(&hs[2], &target).holds());
    assert!(hs[3..].iter().all(|h| semantic_eq(h, &target).holds()));
}

#[test]
fn mod1_converges_once_every_residue_appeared() {
    let sch = ApproximationSchedule::constant(ExponentProfile::new(vec![4, 2, 1, 1, 1, 1]).encode());
    let run = run_builder(Variant::Mod1, &sch, None, 64).unwrap();
    let beta = last_beta(&run);
    for m in [1u32, 2, 4, 6, 9, 16] {
        let target_spec = SubgroupSpec::new(1u32, m).unwrap();
        let target = TextTarget::from_run(&run, target_spec.clone()).unwrap();
        let text = canonical_text(&target, 3, 800).unwrap();
        let l = Mod1BcLearner::new(beta.clone());
        let hs = l.run(&text.items).unwrap();
        let residues = mod1_residues(&target_spec);
        let mut seen = BTreeSet::new();
        let first = text
            .items
            .iter()
            .position(|it| {
                if let Some(x) = it.datum().and_then(|v| target.value(v)) {
                    seen.insert(x.mod_one());
                }
                seen == residues
            })
            .unwrap_or_else(|| panic!("m = {m}: text misses a residue"));
        let goal = Hypothesis::canonical(HypothesisKind::Mod1Subgroup { spec: target_spec });
        assert!(!first.checked_sub(1).is_some_and(|k| semantic_eq(&hs[k], &goal).holds()), "m = {m}");
        assert!(hs[first..].iter().all(|h| semantic_eq(h, &goal).holds()), "m = {m}");
    }
}

#[test]
fn exk_examples() {
    let beta = vec![q("1"), q("1/4"), q("1/3")];
    let l = ExkLearner::new(GroundTruthOracle::new(beta));
    assert_eq!(l.run(&[d(&[0])]).unwrap()[0], l.initial_hypothesis());
    assert!(denotes(&l.initial_hypothesis(), &SubgroupSpec::trivial()));
    let hs = l.run(&[d(&[0]), d(&[1]), d(&[0, 2])]).unwrap();
    assert_eq!(hs[1], subgroup("1"));
    assert_eq!(hs[2], subgroup("1/2"));
    let other = l.run(&[d(&[0, 2]), TextItem::Pause, d(&[1])]).unwrap();
    assert_eq!(other.last(), hs.last());
}

#[test]
fn exk_refuses_queries_beyond_the_sequence() {
    let l = ExkLearner::new(GroundTruthOracle::new(vec![q("1")]));
    assert!(matches!(l.run(&[d(&[0, 1])]), Err(LearnerError::OracleRefused { .. })));
}

#[test]
fn exk_converges_syntactically_to_the_reduced_target() {
    let run = fgsub(&[3, 1, 1, 1], 64);
    let beta = last_beta(&run);
    for s in ["1", "1/2", "3/4", "1/8", "5/6", "2/3"] {
        for seed in 0..3 {
            let text = canonical_text(&TextTarget::from_run(&run, spec(s)).unwrap(), seed, 200).unwrap();
            let hs = ExkLearner::new(GroundTruthOracle::new(beta.clone())).run(&text.items).unwrap();
            let truth = subgroup(s);
            let n0 = prefix_converges(&hs, |h| *h == truth).unwrap_or_else(|| panic!("{s} seed {seed}"));
            assert!(n0 <= 100, "{s} seed {seed}: n0 = {n0}");
        }
    }
}

fn pair(a: &[i64], b: &[i64]) -> TextItem<(Representation, Representation)> {
    TextItem::Datum((r(a), r(b)))
}

#[test]
fn eqclass_examples() {
    let l = EqClassLearner;
    let empty = l.initial_hypothesis();
    assert_eq!(empty.kind, HypothesisKind::EqualityComplement { pivot: 0, ratios: BTreeMap::new() });
    let h = l.run(&[pair(&[], &[0, 1])]).unwrap().pop().unwrap();
    assert!(matches!(h.kind, HypothesisKind::EqualityComplement { pivot: 0, .. }));
    let h = l.run(&[pair(&[], &[1])]).unwrap().pop().unwrap();
    assert!(matches!(h.kind, HypothesisKind::EqualityComplement { pivot: 1, .. }));
    let h = l.run(&[pair(&[], &[1]), pair(&[], &[0, 1])]).unwrap().pop().unwrap();
    assert!(matches!(h.kind, HypothesisKind::EqualityComplement { pivot: 2, .. }));
    let h = l.run(&[pair(&[1], &[0, 2])]).unwrap().pop().unwrap();
    let HypothesisKind::EqualityComplement { pivot: 0, ratios } = &h.kind else { panic!("{h:?}") };
    assert_eq!(ratios.get(&1), Some(&q("1/2")));
    assert!(h.kind.asserts_equal(&r(&[1]), &r(&[0, 2])));
    assert!(!h.kind.asserts_equal(&r(&[1]), &r(&[0, 1])));
}

#[test]
fn eqclass_learns_the_relation_from_pair_texts() {
    let sch = ApproximationSchedule::constant(ExponentProfile::new(vec![3, 1, 1, 1]).encode());
    let run = run_builder(Variant::Core, &sch, None, 20).unwrap();
    let beta = last_beta(&run);
    let truth = equality_truth(&beta);
    for seed in 0..3 {
        let text = pair_text(&beta, seed, 200).unwrap();
        let hs = EqClassLearner.run(&text.items).unwrap();
        let n0 = prefix_converges(&hs, |h| *h == truth).unwrap_or_else(|| panic!("seed {seed}"));
        assert!(n0 < 200);
        assert!(semantic_eq(hs.last().unwrap(), &truth).holds());
    }
}

#[test]
fn subring_examples() {
    let sch = ApproximationSchedule::constant("1".parse().unwrap());
    let run = run_builder(Variant::Subring, &sch, None, 14).unwrap();
    let l = SubringExLearner::new(&run);
    let quarter = run.last().unwrap().beta.iter().position(|b| *b == q("1/4")).unwrap();
    let mut w = vec![0; quarter + 1];
    w[quarter] = 1;
    let hs = l.run(&[d(&[2]), d(&[1]), TextItem::Pause, d(&[3])]).unwrap();
    assert!(denotes(&hs[0], &spec("2")));
    assert!(hs[1..].iter().all(|h| denotes(h, &spec("1"))));
    let hs = l.run(&[d(&[1]), d(&w), d(&[0, 1])]).unwrap();
    assert!(denotes(hs.last().unwrap(), &spec("1/4")));
}

#[test]
fn subring_learner_never_abandons_the_integers_on_their_text() {
    let sch = ApproximationSchedule::constant("1".parse().unwrap());
    let run = run_builder(Variant::Subring, &sch, None, 14).unwrap();
    let text = canonical_text(&TextTarget::from_run(&run, spec("1")).unwrap(), 1, 400).unwrap();
    let hs = SubringExLearner::new(&run).run(&text.items).unwrap();
    let first = hs.iter().position(|h| denotes(h, &spec("1"))).unwrap();
    assert!(hs[first..].iter().all(|h| *h == hs[first]));
}

/// Every mind change at step `n` has a seen datum whose value at some
/// snapshot from stage `n` on lies outside the previous conjecture.
fn conservative(
    run: &[GenSeqState],
    items: &[TextItem<Representation>],
    hs: &[Hypothesis],
    initial: &Hypothesis,
) -> bool {
    let mut prev = initial;
    let mut seen = Vec::new();
    for (n, (item, h)) in items.iter().zip(hs).enumerate() {
        if let Some(x) = item.datum() {
            seen.push(x.clone());
        }
        if h != prev {
            let outside = |v: &Representation| {
                run[n.min(run.len() - 1)..].iter().filter_map(|st| st.value(v)).any(|x| match prev.spec() {
                    Some(s) => !in_span(&x, s),
                    None => true,
                })
            };
            if !seen.iter().any(outside) {
                return false;
            }
        }
        prev = h;
    }
    true
}

#[test]
fn subring_learner_is_conservative() {
    let schedules = [
        ApproximationSchedule::constant("1111".parse().unwrap()),
        ApproximationSchedule::from_strs(&["111", "111", "101", "101", "100"]).unwrap(),
        ApproximationSchedule::from_strs(&["01", "11", "11", "011"]).unwrap(),
    ];
    for sch in &schedules {
        let run = run_builder(Variant::Subring, sch, None, 14).unwrap();
        let l = SubringExLearner::new(&run);
        for s in ["1", "1/2", "3", "2/3", "5/8"] {
            let Ok(text) = canonical_text(&TextTarget::from_run(&run, spec(s)).unwrap(), 1, 300) else { continue };
            let hs = l.run(&text.items).unwrap();
            assert!(conservative(&run, &text.items, &hs, &l.initial_hypothesis()), "{s}");
        }
    }
}

/// Conjectures the length of its input, changing on every item.
struct Counter;

impl Learner<Representation> for Counter {
    type State = usize;
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "counter"
    }

    fn initial(&self) -> usize {
        0
    }

    fn initial_hypothesis(&self) -> Hypothesis {
        Hypothesis::new(HypothesisKind::Empty, "0")
    }

    fn step(&self, n: &usize, _: &TextItem<Representation>) -> Result<(usize, Hypothesis), LearnerError> {
        Ok((n + 1, Hypothesis::new(HypothesisKind::Empty, (n + 1).to_string())))
    }
}

/// Always conjectures the integers.
struct Constant;

impl Learner<Representation> for Constant {
    type State = ();
    type Hyp = Hypothesis;

    fn name(&self) -> &str {
        "constant"
    }

    fn initial(&self) {}

    fn initial_hypothesis(&self) -> Hypothesis {
        subgroup("1")
    }

    fn step(&self, _: &(), _: &TextItem<Representation>) -> Result<((), Hypothesis), LearnerError> {
        Ok(((), subgroup("1")))
    }
}

#[test]
fn stabilising_sequence_examples() {
    let base = [d(&[1]), d(&[2]), d(&[3])];
    let ext = [d(&[1]), TextItem::Pause];
    let found = find_stabilising_sequence(&Constant, &base, &ext, StabilityMode::Syntactic, 100).unwrap();
    assert!(matches!(found, StabilisingSearch::Found { ref sequence, .. } if sequence.is_empty()));
    for budget in [1, 10, 1000] {
        let res = find_stabilising_sequence(&Counter, &base, &ext, StabilityMode::Syntactic, budget).unwrap();
        assert!(matches!(res, StabilisingSearch::NotFound { .. }), "budget {budget}");
    }
}

#[test]
fn bc_stabilises_semantically_on_the_integers() {
    let run = fgsub(&[2, 1], 12);
    let beta = last_beta(&run);
    let text = canonical_text(&TextTarget::from_run(&run, spec("1")).unwrap(), 0, 60).unwrap();
    let mut ext: Vec<_> = text.members.iter().cloned().map(TextItem::Datum).collect();
    ext.push(TextItem::Pause);
    let bc = BcLearner::new(beta);
    let res = find_stabilising_sequence(&bc, &text.items, &ext, StabilityMode::Semantic, 100_000).unwrap();
    let StabilisingSearch::Found { sequence, .. } = res else { panic!("{res:?}") };
    // The positive singletons of the sequence already pin the numerator to 1.
    let gcd = sequence
        .iter()
        .filter_map(TextItem::datum)
        .filter_map(Representation::single_entry)
        .filter(|&(j, c)| j == 0 && c > 0)
        .fold(0i64, |g, (_, c)| (1..=c.max(g)).rev().find(|k| c % k == 0 && g % k == 0).unwrap());
    assert_eq!(gcd, 1, "{sequence:?}");
    // Exhaustive check of the one-step extensions.
    let h = bc.conjecture(&sequence).unwrap();
    assert!(denotes(&h, &spec("1")));
    for e in &ext {
        let mut longer = sequence.clone();
        longer.push(e.clone());
        assert!(semantic_eq(&bc.conjecture(&longer).unwrap(), &h).holds());
    }
}

#[test]
fn ex_adversary_finds_bc_mind_changes() {
    let run = fgsub(&[3, 1, 1, 1], 32);
    let bc = BcLearner::new(last_beta(&run));
    let ExAdversaryReport::Witness { witness, .. } = ex_adversary(&bc, &run, 10_000).unwrap() else {
        panic!("expected a witness")
    };
    assert!(witness.replays(&bc).unwrap());
    assert!(witness
        .delta
        .iter()
        .filter_map(TextItem::datum)
        .all(|x| { TextTarget::from_run(&run, SubgroupSpec::integers()).unwrap().contains(x) }));
}

#[test]
fn ex_adversary_exhausts_on_exk() {
    let run = fgsub(&[3, 1, 1, 1], 32);
    let exk = ExkLearner::new(GroundTruthOracle::new(last_beta(&run)));
    let report = ex_adversary(&exk, &run, 10_000).unwrap();
    assert!(matches!(report, ExAdversaryReport::Exhausted { .. }), "{report:?}");
}

#[test]
fn ex_adversary_with_no_budget() {
    let run = fgsub(&[1], 4);
    let report = ex_adversary(&Constant, &run, 0).unwrap();
    assert_eq!(
        report,
        ExAdversaryReport::Exhausted {
            reason: ExhaustionReason::BudgetSpent,
            gamma: None,
            justified_primes: vec![],
            steps: 0
        }
    );
}

#[test]
fn bc_adversary_falsifies_all_equal_at_once() {
    let profile = ExponentProfile::new(vec![2, 1]);
    let report = bc_adversary(&AllEqualLearner, &profile, 4, 10_000).unwrap();
    assert_eq!(report.exhausted, None);
    assert_eq!(report.falsifications.len(), 4);
    assert_eq!(report.falsifications[0].stage, 0);
    for f in &report.falsifications {
        assert!(refutes(&report.beta, &f.sigma, &f.tau), "{f:?}");
    }
}

#[test]
fn bc_adversary_texts_are_true_equalities() {
    let profile = ExponentProfile::new(vec![2, 1]);
    let report = bc_adversary(&AllEqualLearner, &profile, 4, 10_000).unwrap();
    for (a, b) in report.text.iter().filter_map(TextItem::datum) {
        assert!(!refutes(&report.beta, a, b), "({a}, {b})");
    }
}

#[test]
fn bc_adversary_exhausts_on_seen_only() {
    let profile = ExponentProfile::new(vec![2, 1]);
    let report = bc_adversary(&SeenOnlyLearner, &profile, 4, 10_000).unwrap();
    assert!(report.falsifications.is_empty());
    assert_eq!(report.exhausted, Some(ExhaustionReason::SearchSpaceExhausted));
}

#[test]
fn bc_adversary_replays_identically() {
    let profile = ExponentProfile::new(vec![3, 0, 1]);
    let a = bc_adversary(&AllEqualLearner, &profile, 5, 10_000).unwrap();
    let b = bc_adversary(&AllEqualLearner, &profile, 5, 10_000).unwrap();
    assert_eq!(a, b);
    let short = bc_adversary(&AllEqualLearner, &profile, 5, 3).unwrap();
    assert_eq!(short.exhausted, Some(ExhaustionReason::BudgetSpent));
}

#[test]
fn pair_conjectures_of_the_eqclass_learner() {
    let h = EqClassLearner.run(&[pair(&[1], &[0, 2])]).unwrap().pop().unwrap();
    assert!(PairConjecture::contains(&h, &r(&[2]), &r(&[0, 4])));
    assert!(!PairConjecture::contains(&h, &r(&[1]), &r(&[0, 0, 1])));
}

#[test]
fn semantic_eq_examples() {
    let half = Hypothesis::canonical(HypothesisKind::Subgroup { spec: SubgroupSpec::reduced(2u32, 4u32).unwrap() });
    assert!(semantic_eq(&half, &subgroup("1/2")).holds());
    assert_eq!(semantic_eq(&subgroup("1/2"), &subgroup("1/3")), SemanticVerdict::Different);
    let m = Hypothesis::canonical(HypothesisKind::Mod1Subgroup { spec: spec("1/4") });
    let res = Hypothesis::canonical(HypothesisKind::Mod1Residues {
        residues: ["0", "1/4", "1/2", "3/4"].into_iter().map(q).collect(),
    });
    assert!(semantic_eq(&m, &res).holds());
    assert!(matches!(semantic_eq(&m, &subgroup("1/4")), SemanticVerdict::Incomparable(_)));
    assert!(!semantic_eq(&m, &subgroup("1/4")).holds());
}

#[test]
fn canonical_text_examples() {
    let run = fgsub(&[2, 1], 12);
    let ones = TextTarget::from_run(&run, spec("1")).unwrap();
    let t = canonical_text(&ones, 0, 10).unwrap();
    assert_eq!(t.len(), 10);
    assert!(t.items.contains(&d(&[1])));
    assert!(t.is_fair());
    assert_eq!(canonical_text(&ones, 0, 10).unwrap(), t);
    let halves = TextTarget::from_run(&run, spec("1/2")).unwrap();
    let t = canonical_text(&halves, 5, 80).unwrap();
    assert!(t.items.contains(&d(&[2])));
    assert!(t.items.iter().filter_map(TextItem::datum).any(|v| !halves.value(v).unwrap().is_integer()));
    assert!(t.items.iter().filter_map(TextItem::datum).all(|v| halves.contains(v)));
    assert_eq!(canonical_text(&ones, 0, 1).unwrap_err(), LearnerError::TextTooShort(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn learners_answer_every_input(items in prop::collection::vec(prop::option::of(prop::collection::vec(-4i64..=4, 0..5)), 0..30)) {
        let beta = vec![q("1"), q("1/4"), q("1/3"), q("1"), q("1/5")];
        let items: Vec<_> = items.into_iter().map(|o| o.map_or(TextItem::Pause, |v| TextItem::Datum(r(&v)))).collect();
        prop_assert_eq!(BcLearner::new(beta.clone()).run(&items).unwrap().len(), items.len());
        prop_assert_eq!(Mod1BcLearner::new(beta.clone()).run(&items).unwrap().len(), items.len());
        prop_assert_eq!(ExkLearner::new(GroundTruthOracle::new(beta)).run(&items).unwrap().len(), items.len());
    }
}
