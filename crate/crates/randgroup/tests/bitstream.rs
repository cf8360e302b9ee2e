use num_bigint::BigUint;
use proptest::prelude::*;

use randgroup::bitstream::{
    approx_prefix, decode_profile, martingale_value, sample_profile_geometric, ApproximationSchedule, BitString,
    Enumeration, ExponentProfile,
};

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

/// All strings of length `n`.
fn all_strings(n: usize) -> impl Iterator<Item = BitString> {
    (0u32..1 << n).map(move |x| BitString::new((0..n).map(|k| x >> k & 1 == 1).collect()))
}

#[test]
fn approx_prefix_returns_stage_verbatim() {
    let sch = ApproximationSchedule::from_strs(&["1111010", "1101010"]).unwrap();
    assert_eq!(approx_prefix(&sch, 1), &bits("1101010"));
    assert_eq!(approx_prefix(&sch, 0), &bits("1111010"));
    assert_eq!(approx_prefix(&sch, 7), &bits("1101010"));
}

#[test]
fn constant_schedule_is_the_same_at_every_stage() {
    let sch = ApproximationSchedule::constant(bits("10110"));
    for s in 0..5 {
        assert_eq!(approx_prefix(&sch, s), &bits("10110"));
    }
}

#[test]
fn empty_schedule_is_rejected() {
    assert!(ApproximationSchedule::new(Vec::new()).is_err());
}

#[test]
fn bad_bit_characters_are_rejected() {
    assert!("10x1".parse::<BitString>().is_err());
}

#[test]
fn schedule_json_shape() {
    let sch = ApproximationSchedule::from_strs(&["11", "10"]).unwrap();
    let json = serde_json::to_string(&sch).unwrap();
    assert_eq!(json, r#"{"stages":["11","10"]}"#);
    let back: ApproximationSchedule = serde_json::from_str(&json).unwrap();
    assert_eq!(back, sch);
    assert!(serde_json::from_str::<ApproximationSchedule>(r#"{"stages":[]}"#).is_err());
}

#[test]
fn profile_json_shape() {
    let p = ExponentProfile::new(vec![2, 1, 0]);
    assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"exponents":[2,1,0]}"#);
}

#[test]
fn decode_examples() {
    assert_eq!(decode_profile(&bits("11010")).support(), &[2, 1]);
    assert_eq!(decode_profile(&bits("0000")).support(), &[] as &[u32]);
    assert_eq!(decode_profile(&bits("101")).support(), &[1, 1]);
    assert_eq!(decode_profile(&bits("11010")).get(5), 0);
}

#[test]
fn geometric_sampling_is_deterministic() {
    assert_eq!(sample_profile_geometric(17, 3), sample_profile_geometric(17, 3));
    assert_eq!(sample_profile_geometric(17, 3).len(), 3);
}

#[test]
fn geometric_sampling_statistics() {
    let p = sample_profile_geometric(2024, 100_000);
    let xs = p.exponents();
    let mean = xs.iter().map(|&n| n as f64).sum::<f64>() / xs.len() as f64;
    let zeros = xs.iter().filter(|&&n| n == 0).count() as f64 / xs.len() as f64;
    assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    assert!((zeros - 0.5).abs() < 0.01, "P(0) {zeros}");
}

#[test]
fn martingale_examples() {
    let e = Enumeration::first_n(20);
    assert_eq!(martingale_value(&e, &bits("100")), BigUint::from(0u32));
    assert_eq!(martingale_value(&e, &bits("101")), BigUint::from(2u32));
    assert_eq!(martingale_value(&e, &BitString::default()), BigUint::from(1u32));
    assert_eq!(martingale_value(&Enumeration::new(vec![3, 7]).unwrap(), &BitString::default()), BigUint::from(1u32));
}

#[test]
fn enumeration_must_increase() {
    assert!(Enumeration::new(vec![2, 2]).is_err());
    assert!(Enumeration::new(vec![0, 1]).is_err());
    assert!(Enumeration::new(vec![1, 4, 9]).is_ok());
}

#[test]
fn martingale_is_fair_exhaustively() {
    let enums = [
        Enumeration::first_n(13),
        Enumeration::new(vec![1, 3, 5, 7, 9, 11]).unwrap(),
        Enumeration::new(vec![2, 5, 9]).unwrap(),
        Enumeration::new(vec![4]).unwrap(),
        Enumeration::new(Vec::new()).unwrap(),
    ];
    for e in &enums {
        for n in 0..=12 {
            for s in all_strings(n) {
                let v = martingale_value(e, &s);
                let sum = martingale_value(e, &s.with(false)) + martingale_value(e, &s.with(true));
                assert_eq!(sum, v * 2u32, "{:?} on {s}", e.indices());
            }
        }
    }
}

#[test]
fn martingale_succeeds_on_confirming_sequence() {
    let e = Enumeration::first_n(8);
    let s = bits(&"01".repeat(8));
    assert!(martingale_value(&e, &s) >= BigUint::from(256u32));
    let mut prefix = BitString::default();
    let mut confirmed = 0u32;
    for b in s.bits() {
        prefix.push(*b);
        if *b && prefix.len() >= 2 {
            confirmed += 1;
            assert!(martingale_value(&e, &prefix) >= BigUint::from(1u32) << confirmed);
        }
    }
}

proptest! {
    #[test]
    fn decode_inverts_encode(exps in prop::collection::vec(0u32..6, 0..12)) {
        let p = ExponentProfile::new(exps);
        let q = decode_profile(&p.encode());
        prop_assert_eq!(q.support(), p.support());
    }

    #[test]
    fn schedule_bits_are_fixed_after_their_bound(seed in 0u64..500, i in 0usize..40) {
        let sch = ApproximationSchedule::pseudo_random(seed, 6, 10);
        let limit = sch.final_stage().get(i);
        for s in sch.stabilization_bound(i)..sch.num_stages() + 3 {
            prop_assert_eq!(approx_prefix(&sch, s).get(i), limit);
        }
    }

    #[test]
    fn pseudo_random_schedules_are_reproducible(seed in 0u64..1000) {
        prop_assert_eq!(ApproximationSchedule::pseudo_random(seed, 5, 8), ApproximationSchedule::pseudo_random(seed, 5, 8));
    }
}
