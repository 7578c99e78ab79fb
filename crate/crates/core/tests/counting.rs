use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use dioph::counting::{count_q, verify_count_lower_bound, CountQuery, Delta};
use dioph::real::{RealExpr, RealVector};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn point(s: &str) -> RealVector {
    s.parse().unwrap()
}

fn count(x: &RealVector, delta: BigRational, m: u64, n: u64) -> u64 {
    count_q(&CountQuery::new(x.clone(), Delta::rational(delta), m, n)).unwrap().count
}

// Frozen from oracles/small_counts.py (mpmath, 60 digits).
#[test]
fn counts_match_oracle() {
    assert_eq!(count(&point("sqrt2m1"), q(1, 10), 0, 100), 19);
    assert_eq!(count(&point("golden"), q(1, 20), 0, 1000), 100);
    let x = point("sqrt(2),sqrt(3)");
    assert_eq!(count(&x, q(1, 5), 0, 1000), 159);
    assert_eq!(count(&x, q(1, 5), 500, 1000), 80);
}

#[test]
fn witnesses_are_the_counted_q() {
    let r = count_q(&CountQuery::new(point("sqrt2m1"), Delta::rational(q(1, 10)), 0, 100).with_witnesses(100)).unwrap();
    let w = r.witnesses.unwrap();
    assert_eq!(w.len() as u64, r.count);
    assert!(!r.witnesses_truncated);
    assert!(w.windows(2).all(|p| p[0] < p[1]));
    let capped = count_q(&CountQuery::new(point("sqrt2m1"), Delta::rational(q(1, 10)), 0, 100).with_witnesses(3)).unwrap();
    assert_eq!(capped.witnesses.unwrap(), w[..3].to_vec());
    assert!(capped.witnesses_truncated);
}

#[test]
fn lower_bound_holds_on_rationals_and_surds() {
    for (x, d, n) in [("1/3", q(1, 2), 30), ("sqrt2m1", q(1, 10), 1000), ("1/7,2/7", q(1, 3), 500), ("golden,sqrt(5)", q(1, 4), 2000)] {
        let r = verify_count_lower_bound(&point(x), &d, n).unwrap();
        assert!(r.pass, "{x}: {r}");
    }
}

#[test]
fn delta_outside_unit_interval_is_rejected() {
    assert!(verify_count_lower_bound(&point("sqrt2m1"), &q(1, 1), 10).is_err());
    assert!(verify_count_lower_bound(&point("sqrt2m1"), &q(0, 1), 10).is_err());
}

fn rational_point() -> impl Strategy<Value = RealVector> {
    prop::collection::vec((1i64..200).prop_flat_map(|d| (0..d, Just(d))), 1..=2)
        .prop_map(|v| RealVector::new(v.into_iter().map(|(p, d)| RealExpr::ratio(p, d).unwrap()).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn count_is_additive_over_ranges(x in rational_point(), den in 2i64..20, m in 0u64..500, extra in 0u64..500) {
        let d = q(1, den);
        let n = m + extra;
        prop_assert_eq!(count(&x, d.clone(), 0, n), count(&x, d.clone(), 0, m) + count(&x, d, m, n));
    }

    #[test]
    fn count_is_monotone_in_delta(x in rational_point(), a in 1i64..50, b in 1i64..50, n in 1u64..800) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(count(&x, q(lo, 100), 0, n) <= count(&x, q(hi, 100), 0, n));
    }

    #[test]
    fn dirichlet_lower_bound(x in rational_point(), num in 1i64..99, n in 1u64..2000) {
        let r = verify_count_lower_bound(&x, &q(num, 100), n).unwrap();
        prop_assert!(r.pass, "{}", r);
    }
}
