use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::genseq::{GenSeqState, Variant, VectorWindow};
use crate::qarith::{in_span, in_span_mod_one, repr_value, Rational, Representation, SubgroupSpec};

/// One text position: a datum or the pause symbol `#`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextItem<D> {
    Datum(D),
    Pause,
}

impl<D> TextItem<D> {
    pub fn datum(&self) -> Option<&D> {
        match self {
            TextItem::Datum(d) => Some(d),
            TextItem::Pause => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// `sigma . beta` lies in `<q/m>`.
    Exact,
    /// `sigma . beta` lies in `<q/m> + Z`.
    Mod1,
}

/// The set a text enumerates: the representations over `beta` whose value
/// lies in `<q/m>`, exactly or modulo 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTarget {
    pub beta: Vec<Rational>,
    pub spec: SubgroupSpec,
    pub membership: Membership,
}

impl TextTarget {
    pub fn new(beta: Vec<Rational>, spec: SubgroupSpec, membership: Membership) -> Self {
        Self { beta, spec, membership }
    }

    /// Target over the last snapshot of a run; mod1 and Prüfer runs use
    /// membership modulo 1.
    pub fn from_run(run: &[GenSeqState], spec: SubgroupSpec) -> Option<Self> {
        let last = run.last()?;
        let membership = match last.variant {
            Variant::Mod1 | Variant::Prufer => Membership::Mod1,
            _ => Membership::Exact,
        };
        Some(Self::new(last.beta.clone(), spec, membership))
    }

    pub fn value(&self, sigma: &Representation) -> Option<Rational> {
        let len = sigma.support_len();
        if len > self.beta.len() {
            return None;
        }
        let head = Representation::new(sigma.entries()[..len].to_vec());
        repr_value(&head, &self.beta).ok()
    }

    pub fn contains(&self, sigma: &Representation) -> bool {
        self.value(sigma).is_some_and(|x| self.contains_value(&x))
    }

    pub fn contains_value(&self, x: &Rational) -> bool {
        match self.membership {
            Membership::Exact => in_span(x, &self.spec),
            Membership::Mod1 => in_span_mod_one(x, &self.spec),
        }
    }

    /// Least `c >= 1` with `c * beta(j)` in the target, if it fits an `i64`.
    pub fn axis_unit(&self, j: usize) -> Option<i64> {
        let x = self.beta.get(j)?;
        if x.is_zero() {
            return Some(1);
        }
        if self.spec.is_trivial() {
            return None;
        }
        let (a, d) = (x.numer().abs(), x.denom().clone());
        let m = BigInt::from(self.spec.m().clone());
        let g = match self.membership {
            Membership::Exact => {
                let dq = &d * BigInt::from(self.spec.q().clone());
                &dq / dq.gcd(&(&a * &m))
            }
            Membership::Mod1 => &d / d.gcd(&(&a * &m)),
        };
        g.to_i64()
    }

    /// Whether a multiple of `beta(j)` by its axis unit is fractional modulo 1.
    fn axis_fractional(&self, j: usize, g: i64) -> bool {
        !self.beta[j].scale(g).is_integer()
    }
}

/// The window a text certifies: every member of the target among the
/// vectors below is guaranteed to occur in the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextWindow {
    /// Box `{-w..w}^w`.
    pub box_bound: usize,
    /// Positions `j` contributing axis members `+-k * g_j * e_j`.
    pub axis_positions: Vec<usize>,
    /// `k` ranges over `1..=multiples`.
    pub multiples: usize,
    /// Modulo 1 only: small signed sums of two fractional axis units.
    pub pair_sums: bool,
}

/// A finite text with the window it is fair for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text<D> {
    pub items: Vec<TextItem<D>>,
    /// Every member of the certified window, each occurring in `items`.
    pub members: Vec<D>,
    pub window: TextWindow,
}

impl<D: Eq + std::hash::Hash> Text<D> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Whether every certified member occurs in the text.
    pub fn is_fair(&self) -> bool {
        let seen: HashSet<&D> = self.items.iter().filter_map(TextItem::datum).collect();
        self.members.iter().all(|m| seen.contains(m))
    }
}

const PAIR_SUM_RANGE: i64 = 3;

fn members_for(target: &TextTarget, window: &TextWindow) -> Vec<Representation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |v: Representation, out: &mut Vec<Representation>| {
        let trimmed = Representation::new(v.entries()[..v.support_len()].to_vec());
        if seen.insert(trimmed.clone()) {
            out.push(trimmed);
        }
    };
    if window.box_bound > 0 && target.beta.len() >= window.box_bound {
        for v in VectorWindow::new(window.box_bound).vectors() {
            if target.contains(v) {
                push(v.clone(), &mut out);
            }
        }
    }
    let mut fractional = Vec::new();
    for &j in &window.axis_positions {
        let Some(g) = target.axis_unit(j) else { continue };
        for k in 1..=window.multiples as i64 {
            let Some(c) = g.checked_mul(k) else { break };
            push(Representation::unit(j + 1, c), &mut out);
            push(Representation::unit(j + 1, -c), &mut out);
        }
        if target.axis_fractional(j, g) {
            fractional.push((j, g));
        }
    }
    if window.pair_sums {
        for (x, &(i, gi)) in fractional.iter().enumerate() {
            for &(j, gj) in &fractional[x + 1..] {
                for k in (-PAIR_SUM_RANGE..=PAIR_SUM_RANGE).filter(|&k| k != 0) {
                    for l in (-PAIR_SUM_RANGE..=PAIR_SUM_RANGE).filter(|&l| l != 0) {
                        let (Some(a), Some(b)) = (gi.checked_mul(k), gj.checked_mul(l)) else { continue };
                        let mut e = vec![0; j + 1];
                        e[i] = a;
                        e[j] = b;
                        push(Representation::new(e), &mut out);
                    }
                }
            }
        }
    }
    out
}

/// Position 0 and the fractional positions; the integer positions follow.
fn axis_order(target: &TextTarget) -> (Vec<usize>, Vec<usize>) {
    let n = target.beta.len();
    let (frac, ints): (Vec<usize>, Vec<usize>) = (1..n).partition(|&j| !target.beta[j].is_integer());
    ((0..n.min(1)).chain(frac).collect(), ints)
}

fn window_at(target: &TextTarget, axes: &[usize], level: usize) -> TextWindow {
    let mut axis_positions = axes.to_vec();
    axis_positions.sort_unstable();
    TextWindow {
        box_bound: (level / 2).min(2),
        axis_positions,
        multiples: level + 1,
        pair_sums: target.membership == Membership::Mod1,
    }
}

/// Largest window whose members fill at most half of a text of `length`:
/// the level is maximised over position 0 and the fractional positions,
/// then integer positions are added while they fit.
fn choose_window(target: &TextTarget, length: usize) -> TextWindow {
    let half = length / 2;
    let fits = |axes: &[usize], level| members_for(target, &window_at(target, axes, level)).len() <= half;
    let (mut axes, ints) = axis_order(target);
    while axes.len() > 1 && !fits(&axes, 0) {
        axes.pop();
    }
    let mut level = 0;
    while level < 64 && fits(&axes, level + 1) {
        level += 1;
    }
    for j in ints {
        axes.push(j);
        if !fits(&axes, level) {
            axes.pop();
            break;
        }
    }
    window_at(target, &axes, level)
}

fn filler<D: Clone>(rng: &mut ChaCha20Rng, members: &[D]) -> TextItem<D> {
    if members.is_empty() || rng.gen_ratio(1, 4) {
        TextItem::Pause
    } else {
        TextItem::Datum(members[rng.gen_range(0..members.len())].clone())
    }
}

/// Members shuffled into the first half padded with fillers, then fillers.
fn lay_out<D: Clone>(members: &[D], seed: u64, length: usize) -> Vec<TextItem<D>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let half = (length / 2).max(members.len());
    let mut first: Vec<TextItem<D>> = members.iter().cloned().map(TextItem::Datum).collect();
    while first.len() < half {
        let f = filler(&mut rng, members);
        first.push(f);
    }
    first.shuffle(&mut rng);
    while first.len() < length {
        let f = filler(&mut rng, members);
        first.push(f);
    }
    first.truncate(length.max(members.len()));
    first
}

/// A seeded text for `target` of the given length.
///
/// The certified window is the largest one (box, axis positions and
/// multiples) whose members fit into the first half; they appear there in
/// shuffled order among pauses and repeated members.
pub fn canonical_text(
    target: &TextTarget,
    order_seed: u64,
    length: usize,
) -> Result<Text<Representation>, LearnerError> {
    if length < 2 {
        return Err(LearnerError::TextTooShort(length));
    }
    if target.beta.is_empty() {
        return Err(LearnerError::EmptyTarget);
    }
    let window = choose_window(target, length);
    let members = members_for(target, &window);
    if members.is_empty() {
        return Err(LearnerError::EmptyTarget);
    }
    let items = lay_out(&members, order_seed, length);
    Ok(Text { items, members, window })
}

/// A seeded text of pairs equal under `beta`.
///
/// Members are zero pairs `(0, I_{d+1}(1))` for `beta(d) = 0`, the ratio
/// pairs `(I_{e+1}(q), I_{d+1}(r))` with `q * beta(e) = r * beta(d)` for the
/// first nonzero position `e`, and equal pairs of the box `{-2..2}^2`.
pub fn pair_text(
    beta: &[Rational],
    seed: u64,
    length: usize,
) -> Result<Text<(Representation, Representation)>, LearnerError> {
    if length < 2 {
        return Err(LearnerError::TextTooShort(length));
    }
    let mut members = Vec::new();
    let zero = Representation::new(Vec::new());
    let pivot = beta.iter().position(|b| !b.is_zero());
    let mut positions = Vec::new();
    for (d, b) in beta.iter().enumerate() {
        if members.len() >= length / 2 {
            break;
        }
        if b.is_zero() {
            members.push((zero.clone(), Representation::unit(d + 1, 1)));
            positions.push(d);
        } else if let Some(e) = pivot.filter(|&e| e != d) {
            // q * beta(e) = r * beta(d) with q / r = beta(d) / beta(e) reduced.
            let ratio = b * &Rational::from(beta[e].inner().recip());
            let (Some(q), Some(r)) = (ratio.numer().to_i64(), ratio.denom().to_i64()) else { continue };
            members.push((Representation::unit(e + 1, q), Representation::unit(d + 1, r)));
            positions.push(d);
        }
    }
    if beta.len() >= 2 {
        let window = VectorWindow::new(2);
        let values: Vec<_> = window.vectors().iter().map(|v| repr_value(v, beta).expect("length checked")).collect();
        for i in 0..window.len() {
            for j in i + 1..window.len() {
                if values[i] == values[j] && members.len() < length / 2 {
                    members.push((window.vectors()[i].clone(), window.vectors()[j].clone()));
                }
            }
        }
    }
    if members.is_empty() {
        return Err(LearnerError::EmptyTarget);
    }
    let items = lay_out(&members, seed, length);
    let window = TextWindow { box_bound: 1, axis_positions: positions, multiples: 1, pair_sums: false };
    Ok(Text { items, members, window })
}
