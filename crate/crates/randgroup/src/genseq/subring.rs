use super::{Change, GenSeqState, Variant};
use crate::bitstream::ExponentProfile;
use crate::qarith::{as_unit_prime_power, nth_prime, Rational};

/// Stage `s -> s + 1` of the subring-style builders.
///
/// Step a appends `1/p_i` for the least newly selected prime `p_i` and then
/// tops up `p_j^{-1..=s+1}` for every prime already in play. Step b replaces
/// powers of deselected primes: by a deep power `p^{-n}` of the fixed prime
/// (subring) or by 0 (Prüfer).
pub(super) fn step(state: &GenSeqState, next: &ExponentProfile, beta: &mut Vec<Rational>, log: &mut Vec<Change>) {
    let s = state.stage;
    let fixed = state.fixed_prime.expect("subring-style states carry the fixed prime");
    let schedule = state.schedule();

    // Step a: search later approximations for a prime whose inverse is missing.
    let horizon = schedule.num_stages().max(schedule.final_stage().len()).max(s + 1);
    let has_inverse = |beta: &[Rational], j: usize| beta.contains(&Rational::unit_fraction(nth_prime(j), 1));
    let mut new_prime = None;
    'search: for s_prime in s + 1..=horizon {
        let bits = schedule.approx_prefix(s_prime);
        for i in 0..=s_prime.min(bits.len().saturating_sub(1)) {
            if bits.get(i) && !has_inverse(beta, i) {
                new_prime = Some(i);
                break 'search;
            }
        }
    }
    let mut active: Vec<usize> =
        beta.iter().filter_map(as_unit_prime_power).filter(|&(_, e)| e == 1).map(|(j, _)| j).collect();
    if let Some(i) = new_prime {
        beta.push(Rational::unit_fraction(nth_prime(i), 1));
        active.push(i);
    }
    active.sort_unstable();
    active.dedup();
    for &j in &active {
        for m in 1..=(s as u32 + 1) {
            let cand = Rational::unit_fraction(nth_prime(j), m);
            if !beta.contains(&cand) {
                beta.push(cand);
            }
        }
    }

    // Steps b and c.
    let stale = |x: &Rational| match as_unit_prime_power(x) {
        Some((l, _)) => next.get(l) == 0 && (state.variant == Variant::Prufer || l != fixed),
        None => false,
    };
    while let Some(k) = beta.iter().position(stale) {
        let new = match state.variant {
            Variant::Subring => {
                let deepest = beta
                    .iter()
                    .filter_map(as_unit_prime_power)
                    .filter(|&(l, _)| l == fixed)
                    .map(|(_, e)| e)
                    .max()
                    .unwrap_or(0);
                let n = (s as u32 + 2).max(2 * deepest + s as u32 + 2);
                Rational::unit_fraction(nth_prime(fixed), n)
            }
            Variant::Prufer => Rational::zero(),
            _ => unreachable!("only subring-style variants reach this step"),
        };
        log.push(Change { stage: s + 1, index: k, old: beta[k].clone(), new: new.clone() });
        beta[k] = new;
    }
}
