//! Checkers for the window and stabilization properties of builder runs.
//!
//! Windows at stage 64 hold far too many vectors to enumerate, so each
//! checker works symbolically: inequality through the integer reach of the
//! unchanged entries, equality modulo 1 through prime-by-prime integrality,
//! and subgroup membership through local divisibility conditions plus a
//! residue computation modulo the numerator `q`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::reach::IntegerReach;
use super::{fgsub_threshold, GenSeqState, Variant};
use crate::qarith::{as_unit_prime_power, nth_prime, valuation, Rational, SubgroupSpec};

/// A failed check at the step into `stage`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub stage: usize,
    pub detail: String,
}

impl Violation {
    fn new(stage: usize, detail: impl Into<String>) -> Self {
        Self { stage, detail: detail.into() }
    }
}

/// `Delta_{beta_s}` is contained in `Delta` of the new prefix for every step.
///
/// The logged replacements of each step are replayed in order. Replacing
/// `x` by an integer `w` at position `k` destroys an inequality exactly when
/// `c * w` is an integer reachable from the other positions with coefficient
/// differences in `[-2(s+1), 2(s+1)]`, for some `1 <= c <= 2(s+1)`.
pub fn check_core_monotone(run: &[GenSeqState]) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in run.windows(2) {
        let (st, nx) = (&pair[0], &pair[1]);
        let bound = 2 * (st.stage as i64 + 1);
        let mut cur = st.beta.clone();
        for ch in nx.changes_at_this_stage() {
            if cur.get(ch.index) != Some(&ch.old) {
                out.push(Violation::new(
                    nx.stage,
                    format!("log entry for index {} does not match the sequence", ch.index),
                ));
                continue;
            }
            if !ch.new.is_integer() {
                out.push(Violation::new(nx.stage, format!("index {} replaced by non-integer {}", ch.index, ch.new)));
                continue;
            }
            match IntegerReach::new(&cur, Some(ch.index), bound) {
                None => out.push(Violation::new(nx.stage, "sequence shape not covered by the reach argument")),
                Some(reach) if reach.hits_multiple(ch.new.numer()) => out.push(Violation::new(
                    nx.stage,
                    format!("replacing index {} by {} makes an unequal pair equal", ch.index, ch.new),
                )),
                Some(_) => {}
            }
            cur[ch.index] = ch.new.clone();
        }
        if nx.beta.len() < cur.len() || nx.beta[..cur.len()] != cur[..] {
            out.push(Violation::new(nx.stage, "prefix differs from the logged replacements"));
        }
    }
    out
}

/// Prime index of a prime-power denominator, `None` for integers, `Err` otherwise.
fn denominator_prime(x: &Rational) -> Result<Option<usize>, ()> {
    if x.is_integer() {
        return Ok(None);
    }
    let d = x.denom();
    let reduced = Rational::new(1, d.clone()).expect("positive denominator");
    as_unit_prime_power(&reduced).map(|(i, _)| Some(i)).ok_or(())
}

/// `E_{beta_s}` is contained in `E` of the new prefix for every step.
///
/// With prime-power denominators, a coefficient vector gives an integer
/// exactly when each prime's group of entries does. A changed group therefore
/// keeps every equality as long as all of its entries become integers.
pub fn check_mod1_monotone(run: &[GenSeqState]) -> Vec<Violation> {
    let mut out = Vec::new();
    for pair in run.windows(2) {
        let (st, nx) = (&pair[0], &pair[1]);
        let old = &st.beta;
        let new = &nx.beta[..old.len().min(nx.beta.len())];
        if new.len() < old.len() {
            out.push(Violation::new(nx.stage, "sequence shrank"));
            continue;
        }
        let groups: Result<Vec<_>, ()> = old.iter().map(denominator_prime).collect();
        let Ok(groups) = groups else {
            out.push(Violation::new(nx.stage, "denominator is not a prime power"));
            continue;
        };
        for k in 0..old.len() {
            if old[k] == new[k] {
                continue;
            }
            let members: Vec<usize> = match groups[k] {
                Some(p) => (0..old.len()).filter(|&i| groups[i] == Some(p)).collect(),
                None => vec![k],
            };
            if let Some(&bad) = members.iter().find(|&&i| !new[i].is_integer()) {
                out.push(Violation::new(
                    nx.stage,
                    format!("index {k} changed but index {bad} of the same prime is still fractional"),
                ));
                break;
            }
        }
    }
    out
}

/// Local data of one entry for membership in `<q/m>`: `sigma_i` must be a
/// multiple of `divisor`, and then contributes `(sigma_i / divisor) * weight`
/// to `m * (sigma . beta)`.
struct Local {
    divisor: BigInt,
    weight: BigInt,
    prime: Option<usize>,
}

fn local(x: &Rational, m: &BigInt) -> Option<Local> {
    if x.is_integer() {
        return Some(Local { divisor: BigInt::from(1), weight: x.numer() * m, prime: None });
    }
    let (i, e) = as_unit_prime_power(x)?;
    let p = nth_prime(i);
    let vm = valuation(m, p);
    let divisor = BigInt::from(p).pow(e.saturating_sub(vm));
    let weight = &divisor * m / BigInt::from(p).pow(e);
    Some(Local { divisor, weight, prime: Some(i) })
}

fn distinct_primes(locals: &[Local]) -> bool {
    let mut seen = HashSet::new();
    locals.iter().filter_map(|l| l.prime).all(|p| seen.insert(p))
}

fn residue(t: i64, weight: &BigInt, q: u64) -> usize {
    (BigInt::from(t) * weight).mod_floor(&BigInt::from(q)).to_usize().expect("below q")
}

/// Whether some `sigma` in `{-b..b}^len` lies in `F = <q/m>` under `old`
/// but not under `new`.
///
/// Membership splits into local divisibility conditions per position and a
/// single residue condition modulo `q`. Unchanged positions add the same
/// residue on both sides; changed positions are tracked jointly together with
/// a flag recording a failed local condition under `new`.
pub fn fgsub_window_loses_member(
    old: &[Rational],
    new: &[Rational],
    b: usize,
    spec: &SubgroupSpec,
) -> Result<bool, String> {
    let q = spec
        .q()
        .to_u64()
        .filter(|q| (1..=1 << 20).contains(q))
        .ok_or("numerator out of range for the residue check")?;
    let m = BigInt::from(spec.m().clone());
    let lo: Option<Vec<Local>> = old.iter().map(|x| local(x, &m)).collect();
    let ln: Option<Vec<Local>> = new.iter().map(|x| local(x, &m)).collect();
    let (Some(lo), Some(ln)) = (lo, ln) else {
        return Err("entry is neither an integer nor a unit prime-power fraction".into());
    };
    if !distinct_primes(&lo) || !distinct_primes(&ln) {
        return Err("two fractional entries share a prime".into());
    }
    let qs = q as usize;
    let b = b as i64;
    let mut shared = vec![false; qs];
    shared[0] = true;
    let mut joint: HashSet<(usize, usize, bool)> = HashSet::from([(0, 0, false)]);
    for (o, n) in lo.iter().zip(&ln) {
        let admissible = (-b..=b).filter(|&x| BigInt::from(x).is_multiple_of(&o.divisor));
        if o.divisor == n.divisor && o.weight == n.weight {
            let steps: HashSet<usize> = admissible
                .map(|x| residue((BigInt::from(x) / &o.divisor).to_i64().expect("small"), &o.weight, q))
                .collect();
            let mut next = vec![false; qs];
            for (r, _) in shared.iter().enumerate().filter(|(_, &on)| on) {
                for &st in &steps {
                    next[(r + st) % qs] = true;
                }
            }
            shared = next;
        } else {
            let options: HashSet<(usize, usize, bool)> = admissible
                .map(|x| {
                    let bx = BigInt::from(x);
                    let ro = residue((&bx / &o.divisor).to_i64().expect("small"), &o.weight, q);
                    if bx.is_multiple_of(&n.divisor) {
                        (ro, residue((&bx / &n.divisor).to_i64().expect("small"), &n.weight, q), false)
                    } else {
                        (ro, 0, true)
                    }
                })
                .collect();
            let mut next = HashSet::new();
            for &(a, c, f) in &joint {
                for &(ra, rc, rf) in &options {
                    next.insert(((a + ra) % qs, (c + rc) % qs, f || rf));
                }
            }
            joint = next;
        }
    }
    for (u, _) in shared.iter().enumerate().filter(|(_, &on)| on) {
        for &(a, c, f) in &joint {
            if (u + a) % qs == 0 && (f || (u + c) % qs != 0) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `F_{beta_s}` is contained in `F` of the new prefix for every step out of
/// a stage `s >= s_F`.
pub fn check_fgsub_monotone(run: &[GenSeqState], spec: &SubgroupSpec) -> Vec<Violation> {
    let s_f = fgsub_threshold(run, spec);
    let mut out = Vec::new();
    for pair in run.windows(2).filter(|p| p[0].stage >= s_f) {
        let (st, nx) = (&pair[0], &pair[1]);
        let new = &nx.beta[..st.beta.len()];
        match fgsub_window_loses_member(&st.beta, new, st.stage + 1, spec) {
            Ok(false) => {}
            Ok(true) => out.push(Violation::new(nx.stage, format!("a member of <{spec}> left the window"))),
            Err(e) => out.push(Violation::new(nx.stage, e)),
        }
    }
    out
}

/// Every coordinate changes at most twice, and a change from a unit
/// fraction to an integer (or to 0) is final. Changes are read off the
/// snapshots and must also agree with the change log of the last state.
pub fn check_stabilization(run: &[GenSeqState]) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some(last) = run.last() else { return out };
    let mut derived = Vec::new();
    for pair in run.windows(2) {
        let (st, nx) = (&pair[0], &pair[1]);
        for (k, (a, b)) in st.beta.iter().zip(&nx.beta).enumerate() {
            if a != b {
                derived.push((nx.stage, k, a.clone(), b.clone()));
            }
        }
    }
    for k in 0..last.beta.len() {
        let changes: Vec<_> = derived.iter().filter(|c| c.1 == k).collect();
        if changes.len() > 2 {
            out.push(Violation::new(changes[2].0, format!("index {k} changed {} times", changes.len())));
        }
        let permanent = changes.iter().position(|c| as_unit_prime_power(&c.2).is_some() && c.3.is_integer());
        if let Some(pos) = permanent {
            if pos + 1 < changes.len() && last.variant != Variant::Subring {
                out.push(Violation::new(
                    changes[pos + 1].0,
                    format!("index {k} changed again after becoming an integer"),
                ));
            }
        }
    }
    // Entries appended and replaced within one stage never show up in a snapshot.
    let prior_len = |stage: usize| run.iter().find(|st| st.stage + 1 == stage).map_or(0, |st| st.beta.len());
    let mut logged: Vec<_> =
        last.change_log.iter().filter(|c| c.index < prior_len(c.stage)).map(|c| (c.stage, c.index)).collect();
    logged.dedup();
    let seen: Vec<_> = derived.iter().map(|c| (c.0, c.1)).collect();
    if seen != logged {
        out.push(Violation::new(last.stage, "change log does not match the snapshots"));
    }
    out
}
