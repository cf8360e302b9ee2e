use num_bigint::BigInt;
use proptest::prelude::*;

use randgroup::bitstream::ExponentProfile;
use randgroup::qarith::{
    as_unit_prime_power, in_group, in_span, in_span_mod_one, nth_prime, prime_index, reduce_generator, repr_value,
    QarithError, Rational, Representation, SubgroupSpec,
};

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn r(v: &[i64]) -> Representation {
    Representation::new(v.to_vec())
}

fn spec(s: &str) -> SubgroupSpec {
    s.parse().unwrap()
}

#[test]
fn rationals_are_reduced_and_serialize_as_strings() {
    assert_eq!(Rational::new(6, -4).unwrap(), q("-3/2"));
    assert_eq!(q("4/2").to_string(), "2");
    assert_eq!(serde_json::to_string(&q("3/16")).unwrap(), "\"3/16\"");
    assert_eq!(serde_json::from_str::<Rational>("\"-5/10\"").unwrap(), q("-1/2"));
    assert!(Rational::new(1, 0).is_err());
    assert!("1/x".parse::<Rational>().is_err());
}

#[test]
fn representations_serialize_as_arrays() {
    assert_eq!(serde_json::to_string(&r(&[2, -1])).unwrap(), "[2,-1]");
}

#[test]
fn primes_are_indexed_from_two() {
    assert_eq!(nth_prime(0), 2);
    assert_eq!(nth_prime(5), 13);
    assert_eq!(prime_index(13), Some(5));
    assert_eq!(prime_index(9), None);
    assert_eq!(as_unit_prime_power(&q("1/16")), Some((0, 4)));
    assert_eq!(as_unit_prime_power(&q("1/6")), None);
    assert_eq!(as_unit_prime_power(&q("2/3")), None);
}

#[test]
fn repr_value_examples() {
    assert_eq!(repr_value(&r(&[2, -1]), &[q("1"), q("1/4")]).unwrap(), q("7/4"));
    assert_eq!(repr_value(&r(&[]), &[q("1"), q("1/4")]).unwrap(), q("0"));
    assert_eq!(repr_value(&r(&[3]), &[q("1/16"), q("1/3")]).unwrap(), q("3/16"));
    assert_eq!(repr_value(&r(&[1, 1, 1]), &[q("1")]), Err(QarithError::LengthMismatch { sigma: 3, beta: 1 }));
}

#[test]
fn in_group_examples() {
    let p = ExponentProfile::new(vec![2, 1]);
    assert!(in_group(&q("1/4"), &p));
    assert!(!in_group(&q("1/8"), &p));
    assert!(in_group(&q("5/3"), &p));
    assert!(!in_group(&q("1/5"), &p));
}

/// Denominator factored by trial division, compared exponent by exponent.
fn in_group_oracle(x: &Rational, p: &ExponentProfile) -> bool {
    let mut d = x.denom().clone();
    let mut i = 0;
    let mut prime = 2i64;
    while d > BigInt::from(1) {
        let mut e = 0;
        while (&d % prime) == BigInt::from(0) {
            d /= prime;
            e += 1;
        }
        if e > p.get(i) {
            return false;
        }
        prime += 1;
        while (2..prime).any(|k| prime % k == 0) {
            prime += 1;
        }
        i += 1;
    }
    true
}

#[test]
fn in_span_examples() {
    assert!(in_span(&q("3/2"), &spec("1/2")));
    assert!(!in_span(&q("1/3"), &spec("1/2")));
    assert!(in_span(&q("0"), &spec("5/7")));
    assert!(in_span_mod_one(&q("5/4"), &spec("1/4")));
    assert!(!in_span_mod_one(&q("1/8"), &spec("1/4")));
}

#[test]
fn subgroup_specs_must_be_coprime() {
    assert!(SubgroupSpec::new(2u32, 4u32).is_err());
    assert_eq!(SubgroupSpec::reduced(2u32, 4u32).unwrap(), spec("1/2"));
    assert!("3/0".parse::<SubgroupSpec>().is_err());
    assert_eq!(spec("3"), spec("3/1"));
}

#[test]
fn reduce_generator_examples() {
    assert_eq!(reduce_generator(&[q("1/2"), q("1/3")]).unwrap(), spec("1/6"));
    assert_eq!(reduce_generator(&[q("2"), q("4")]).unwrap(), spec("2"));
    assert_eq!(reduce_generator(&[q("3/4")]).unwrap(), spec("3/4"));
    assert_eq!(reduce_generator(&[q("0"), q("0")]), Err(QarithError::TrivialSubgroup));
}

/// 1/6 generates 1/2 and 1/3, and is an integer combination of them.
#[test]
fn one_sixth_oracle() {
    let g = q("1/6");
    assert!(q("1/2") == g.scale(3) && q("1/3") == g.scale(2));
    let found = (-3i64..=3)
        .flat_map(|a| (-3i64..=3).map(move |b| (a, b)))
        .any(|(a, b)| &q("1/2").scale(a) + &q("1/3").scale(b) == g);
    assert!(found);
}

#[test]
fn equality_reduces_to_zero_test() {
    let beta = [q("1"), q("1/16"), q("1/3")];
    let mut vs = vec![Vec::new()];
    for _ in 0..3 {
        vs = vs.into_iter().flat_map(|v: Vec<i64>| (-3..=3).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    for a in &vs {
        for b in &vs {
            let (a, b) = (r(a), r(b));
            let eq = repr_value(&a, &beta).unwrap() == repr_value(&b, &beta).unwrap();
            let diff = repr_value(&a.difference(&b), &beta).unwrap();
            assert_eq!(eq, diff.is_zero());
        }
    }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-50i64..50, 1i64..60).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn repr_value_is_linear(
        beta in prop::collection::vec(small_rational(), 6),
        a in prop::collection::vec(-5i64..=5, 0..6),
        b in prop::collection::vec(-5i64..=5, 0..6),
    ) {
        let (a, b) = (r(&a), r(&b));
        let lhs = repr_value(&a.sum(&b), &beta).unwrap();
        let rhs = &repr_value(&a, &beta).unwrap() + &repr_value(&b, &beta).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #[test]
    fn generators_span_their_values(values in prop::collection::vec(small_rational(), 1..6)) {
        prop_assume!(values.iter().any(|v| !v.is_zero()));
        let g = reduce_generator(&values).unwrap();
        for v in &values {
            prop_assert!(in_span(v, &g));
        }
    }

    #[test]
    fn group_is_closed_under_integer_multiples(
        exps in prop::collection::vec(0u32..4, 0..5),
        n in -30i64..30,
        d_exps in prop::collection::vec(0u32..4, 5),
        k in -10i64..=10,
    ) {
        let p = ExponentProfile::new(exps);
        let d: i64 = d_exps.iter().enumerate().map(|(i, &e)| (nth_prime(i) as i64).pow(e)).product();
        let x = Rational::new(n, d).unwrap();
        prop_assert_eq!(in_group(&x, &p), in_group_oracle(&x, &p));
        if in_group(&x, &p) {
            prop_assert!(in_group(&x.scale(k), &p));
        }
    }
}
