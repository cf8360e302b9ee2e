use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{BuilderRun, GenSeqError, GenSeqState, Variant};
use crate::qarith::{
    as_unit_prime_power, factor_small, in_span, in_span_mod_one, Rational, Representation, SubgroupSpec,
};

/// All vectors in `{-w, ..., w}^w`, in lexicographic order. Shorter
/// representations are identified with their zero padding.
#[derive(Debug, Clone)]
pub struct VectorWindow {
    bound: usize,
    vectors: Vec<Representation>,
}

impl VectorWindow {
    pub fn new(bound: usize) -> Self {
        let w = bound as i64;
        let mut vectors = vec![Representation::new(Vec::new())];
        for _ in 0..bound {
            vectors = vectors
                .into_iter()
                .flat_map(|v| {
                    (-w..=w).map(move |x| {
                        let mut e = v.entries().to_vec();
                        e.push(x);
                        Representation::new(e)
                    })
                })
                .collect();
        }
        Self { bound, vectors }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn vectors(&self) -> &[Representation] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Index of `sigma` (after padding or trimming zeros), if it lies in the window.
    pub fn index_of(&self, sigma: &Representation) -> Option<usize> {
        if sigma.support_len() > self.bound || sigma.max_abs() > self.bound as u64 {
            return None;
        }
        let w = self.bound as i64;
        let padded = sigma.padded(self.bound);
        Some(
            padded.entries()[..self.bound].iter().fold(0usize, |acc, &x| acc * (2 * self.bound + 1) + (x + w) as usize),
        )
    }
}

/// An unordered pair of window vectors (`a < b`), found at `stage_found`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPair<'a> {
    pub sigma: &'a Representation,
    pub tau: &'a Representation,
    pub a: usize,
    pub b: usize,
    pub stage_found: usize,
}

/// A window vector found at `stage_found`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowMember<'a> {
    pub sigma: &'a Representation,
    pub index: usize,
    pub stage_found: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Unequal,
    EqualMod1,
}

const OUTSIDE: u32 = u32::MAX;

struct StageClasses {
    classes: Vec<u32>,
    members: Vec<u32>,
    buckets: Vec<Vec<u32>>,
}

impl StageClasses {
    fn compute(state: &GenSeqState, window: &VectorWindow, mod_one: bool) -> Self {
        let mut ids: HashMap<Rational, u32> = HashMap::new();
        let mut classes = vec![OUTSIDE; window.len()];
        let mut members = Vec::new();
        let mut buckets: Vec<Vec<u32>> = Vec::new();
        for (i, v) in window.vectors().iter().enumerate() {
            if !state.committed.admits(v) {
                continue;
            }
            let mut x = state.value(v).expect("committed windows fit the sequence");
            if mod_one {
                x = x.mod_one();
            }
            let next = ids.len() as u32;
            let id = *ids.entry(x).or_insert(next);
            if id as usize == buckets.len() {
                buckets.push(Vec::new());
            }
            buckets[id as usize].push(i as u32);
            classes[i] = id;
            members.push(i as u32);
        }
        Self { classes, members, buckets }
    }
}

enum Phase {
    /// Pairs with at least one vector entering the window at this stage.
    Entering {
        ni: usize,
        ci: usize,
    },
    /// Pairs already in the window whose relation flipped at this stage.
    Flipped {
        bucket: usize,
        i: usize,
        j: usize,
    },
    Done,
}

/// Lazy union of the stage windows of a run, restricted to a [`VectorWindow`]
/// and emitted in stage order.
///
/// A pair is emitted at the first stage where both vectors are admitted by
/// the committed window and satisfy the relation. On runs whose windows are
/// monotone (see [`super::verify`]) every pair is emitted at most once.
pub struct PairStream<'a> {
    run: &'a [GenSeqState],
    window: &'a VectorWindow,
    relation: Relation,
    last_stage: usize,
    stage: usize,
    cur: StageClasses,
    prev: Option<StageClasses>,
    entering: Vec<u32>,
    is_new: Vec<bool>,
    phase: Phase,
}

impl<'a> PairStream<'a> {
    fn new(run: &'a [GenSeqState], window: &'a VectorWindow, relation: Relation, budget: usize) -> Self {
        let cur = StageClasses::compute(&run[0], window, relation == Relation::EqualMod1);
        let mut stream = Self {
            run,
            window,
            relation,
            last_stage: budget.min(run.len() - 1),
            stage: 0,
            entering: Vec::new(),
            is_new: vec![false; window.len()],
            cur,
            prev: None,
            phase: Phase::Entering { ni: 0, ci: 0 },
        };
        stream.mark_entering();
        stream
    }

    fn mark_entering(&mut self) {
        self.entering.clear();
        for &i in &self.cur.members {
            let fresh = self.prev.as_ref().map_or(true, |p| p.classes[i as usize] == OUTSIDE);
            self.is_new[i as usize] = fresh;
            if fresh {
                self.entering.push(i);
            }
        }
    }

    fn related(&self, x: u32, y: u32) -> bool {
        let (cx, cy) = (self.cur.classes[x as usize], self.cur.classes[y as usize]);
        match self.relation {
            Relation::Unequal => cx != cy,
            Relation::EqualMod1 => cx == cy,
        }
    }

    fn advance_stage(&mut self) {
        if self.stage >= self.last_stage {
            self.phase = Phase::Done;
            return;
        }
        self.stage += 1;
        let next = StageClasses::compute(&self.run[self.stage], self.window, self.relation == Relation::EqualMod1);
        self.prev = Some(std::mem::replace(&mut self.cur, next));
        self.mark_entering();
        self.phase = Phase::Entering { ni: 0, ci: 0 };
    }

    fn pair(&self, x: u32, y: u32) -> WindowPair<'a> {
        let (a, b) = if x < y { (x as usize, y as usize) } else { (y as usize, x as usize) };
        let v = self.window.vectors();
        WindowPair { sigma: &v[a], tau: &v[b], a, b, stage_found: self.stage }
    }
}

impl<'a> Iterator for PairStream<'a> {
    type Item = WindowPair<'a>;

    fn next(&mut self) -> Option<WindowPair<'a>> {
        loop {
            match self.phase {
                Phase::Done => return None,
                Phase::Entering { ni, ci } => {
                    let Some(&a) = self.entering.get(ni) else {
                        self.phase = Phase::Flipped { bucket: 0, i: 0, j: 1 };
                        continue;
                    };
                    let cands = match self.relation {
                        Relation::Unequal => &self.cur.members,
                        Relation::EqualMod1 => &self.cur.buckets[self.cur.classes[a as usize] as usize],
                    };
                    let Some(&b) = cands.get(ci) else {
                        self.phase = Phase::Entering { ni: ni + 1, ci: 0 };
                        continue;
                    };
                    self.phase = Phase::Entering { ni, ci: ci + 1 };
                    if b == a || (self.is_new[b as usize] && b < a) {
                        continue;
                    }
                    if self.related(a, b) {
                        return Some(self.pair(a, b));
                    }
                }
                Phase::Flipped { bucket, i, j } => {
                    let Some(prev) = self.prev.as_ref() else {
                        self.advance_stage();
                        continue;
                    };
                    let buckets = match self.relation {
                        Relation::Unequal => &prev.buckets,
                        Relation::EqualMod1 => &self.cur.buckets,
                    };
                    let Some(bk) = buckets.get(bucket) else {
                        self.advance_stage();
                        continue;
                    };
                    if i >= bk.len() {
                        self.phase = Phase::Flipped { bucket: bucket + 1, i: 0, j: 1 };
                        continue;
                    }
                    if j >= bk.len() {
                        self.phase = Phase::Flipped { bucket, i: i + 1, j: i + 2 };
                        continue;
                    }
                    let (x, y) = (bk[i], bk[j]);
                    self.phase = Phase::Flipped { bucket, i, j: j + 1 };
                    let emit = match self.relation {
                        // Equal at the previous stage; both stay admitted.
                        Relation::Unequal => self.related(x, y),
                        Relation::EqualMod1 => {
                            !self.is_new[x as usize]
                                && !self.is_new[y as usize]
                                && prev.classes[x as usize] != prev.classes[y as usize]
                        }
                    };
                    if emit {
                        return Some(self.pair(x, y));
                    }
                }
            }
        }
    }
}

fn expect_variant(run: &[GenSeqState], allowed: &[Variant], expected: &'static str) -> Result<(), GenSeqError> {
    let first = run.first().ok_or(GenSeqError::EmptyRun)?;
    if allowed.contains(&first.variant) {
        Ok(())
    } else {
        Err(GenSeqError::WrongVariant { expected, found: first.variant })
    }
}

/// Inequalities of a core or subring run, restricted to `window`.
pub fn enumerate_neq<'a>(
    run: &'a [GenSeqState],
    window: &'a VectorWindow,
    budget: usize,
) -> Result<PairStream<'a>, GenSeqError> {
    expect_variant(run, &[Variant::Core, Variant::Subring], "core or subring")?;
    Ok(PairStream::new(run, window, Relation::Unequal, budget))
}

/// Equalities modulo 1 of a mod1 or Prüfer run, restricted to `window`.
pub fn enumerate_eq_mod1<'a>(
    run: &'a [GenSeqState],
    window: &'a VectorWindow,
    budget: usize,
) -> Result<PairStream<'a>, GenSeqError> {
    expect_variant(run, &[Variant::Mod1, Variant::Prufer], "mod1 or prufer")?;
    Ok(PairStream::new(run, window, Relation::EqualMod1, budget))
}

/// First stage in `from..=last` at which `pred` holds for a window vector the
/// committed window admits.
fn first_stages<'a>(
    run: &'a [GenSeqState],
    window: &'a VectorWindow,
    from: usize,
    last: usize,
    pred: impl Fn(&Rational) -> bool,
) -> Vec<WindowMember<'a>> {
    let mut out = Vec::new();
    let mut found = vec![false; window.len()];
    for state in run.iter().take(last + 1).skip(from) {
        for (i, v) in window.vectors().iter().enumerate() {
            if found[i] || !state.committed.admits(v) {
                continue;
            }
            if pred(&state.value(v).expect("committed windows fit the sequence")) {
                found[i] = true;
                out.push(WindowMember { sigma: v, index: i, stage_found: state.stage });
            }
        }
    }
    out
}

/// The stage `s_F` after which fgsub replacements preserve membership in
/// `<q/m>`: every exponent of `q` and `m` is at most `s_F`, and no entry with
/// a prime `<= p_h` changes after it, `p_h` the largest prime dividing `q * m`.
pub fn fgsub_threshold(run: &[GenSeqState], spec: &SubgroupSpec) -> usize {
    let qm = BigInt::from(spec.q().clone()) * BigInt::from(spec.m().clone());
    let (factors, _) = factor_small(&qm, usize::MAX);
    let h = factors.iter().map(|&(i, _)| i).max().unwrap_or(0);
    let exps = factors.iter().map(|&(_, e)| e as usize).max().unwrap_or(0);
    let last_change = run
        .last()
        .map(|st| {
            st.change_log
                .iter()
                .filter(|c| as_unit_prime_power(&c.old).is_some_and(|(i, _)| i <= h))
                .map(|c| c.stage)
                .max()
                .unwrap_or(0)
        })
        .unwrap_or(0);
    exps.max(last_change).min(run.len().saturating_sub(1))
}

/// Window vectors whose value lies in `<q/m>`, each with its discovery stage.
///
/// fgsub runs test exact membership from stage [`fgsub_threshold`] on; mod1
/// and Prüfer runs test membership in `<q/m> + Z` from stage 0.
pub fn enumerate_subgroup_reps<'a>(
    run: &'a BuilderRun,
    spec: &SubgroupSpec,
    window: &'a VectorWindow,
    budget: usize,
) -> Result<Vec<WindowMember<'a>>, GenSeqError> {
    expect_variant(run, &[Variant::Fgsub, Variant::Mod1, Variant::Prufer], "fgsub, mod1 or prufer")?;
    if spec.is_trivial() {
        return Err(GenSeqError::TrivialSpec);
    }
    let last = budget.min(run.len() - 1);
    Ok(if run[0].variant == Variant::Fgsub {
        let from = fgsub_threshold(run, spec);
        first_stages(run, window, from, last, |x| in_span(x, spec))
    } else {
        first_stages(run, window, 0, last, |x| in_span_mod_one(x, spec))
    })
}

/// Governing stages `(s0, s1)` for the complement of `<q/m>` in a subring
/// run, or `None` if the run is too short to fix them.
pub fn subring_governing_stages(run: &[GenSeqState], spec: &SubgroupSpec) -> Option<(usize, usize)> {
    let last = run.last()?;
    let beta = &last.beta;
    let fixed = last.fixed_prime?;
    let s0a = beta.iter().rposition(|b| in_span(b, spec)).map_or(0, |j| j + 1);
    let m = BigInt::from(spec.m().clone());
    let p = BigInt::from(crate::qarith::nth_prime(fixed));
    let outside = beta
        .iter()
        .position(|b| as_unit_prime_power(b).is_some_and(|(i, e)| i == fixed && !(&m % p.pow(e)).is_zero()))?;
    let s0 = s0a.max(outside);
    if s0 >= beta.len() {
        return None;
    }
    // Least stage from which the prefix through s0 never changes again.
    let stable_from = |t: usize| run[t].beta.len() > s0 && run[t].beta[..=s0] == beta[..=s0];
    let mut s1 = run.len() - 1;
    while s1 > 0 && stable_from(s1 - 1) {
        s1 -= 1;
    }
    stable_from(s1).then_some((s0, s1.max(s0)))
}

/// Window vectors provably outside `<q/m>` in a subring run.
pub fn enumerate_subring_complement<'a>(
    run: &'a BuilderRun,
    spec: &SubgroupSpec,
    window: &'a VectorWindow,
    budget: usize,
) -> Result<Vec<WindowMember<'a>>, GenSeqError> {
    expect_variant(run, &[Variant::Subring], "subring")?;
    let last = budget.min(run.len() - 1);
    let Some((_, s1)) = subring_governing_stages(&run[..=last], spec) else {
        return Ok(Vec::new());
    };
    Ok(first_stages(run, window, s1, last, |x| !in_span(x, spec)))
}
