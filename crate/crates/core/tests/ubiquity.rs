use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use dioph::approx::ApproxFunction;
use dioph::ubiquity::{check_nreq, mink_cover, union_of_balls, IntervalUnion, DEFAULT_MAX_EVENTS};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

#[test]
fn balls_at_small_denominators() {
    // [0,1/8] ∪ [3/8,5/8] ∪ [7/8,1]
    let centers = [(0, 1), (1, 1), (0, 2), (1, 2), (2, 2)];
    let u = union_of_balls(&centers, |_| q(1, 8)).unwrap();
    assert_eq!(u.measure().exact(), Some(&q(1, 2)));
    assert_eq!(u.intervals().len(), 3);
}

#[test]
fn minkowski_cover_is_full() {
    let x = "sqrt2m1".parse().unwrap();
    let f: ApproxFunction = "q^-1/2".parse().unwrap();
    assert!(check_nreq(&f, 2, 400).unwrap());
    let u = mink_cover(&x, &f, 400, DEFAULT_MAX_EVENTS).unwrap();
    assert!(u.measure().lower_f64() >= 1.0 - 1e-9);
}

fn intervals() -> impl Strategy<Value = Vec<(BigRational, BigRational)>> {
    prop::collection::vec((0i64..1000, 0i64..200), 0..20)
        .prop_map(|v| v.into_iter().map(|(a, w)| (q(a, 1000), q(a + w, 1000))).collect())
}

proptest! {
    #[test]
    fn union_measure_is_subadditive(a in intervals(), b in intervals()) {
        let (ua, ub) = (IntervalUnion::from_intervals(a), IntervalUnion::from_intervals(b));
        let u = ua.union(&ub);
        let m = u.measure().exact().cloned().unwrap();
        let (ma, mb) = (ua.measure().exact().cloned().unwrap(), ub.measure().exact().cloned().unwrap());
        prop_assert!(m <= &ma + &mb);
        prop_assert!(m >= ma.clone().max(mb));
        prop_assert!(m <= q(1, 1));
        prop_assert!(ua.is_subset_of(&u) && ub.is_subset_of(&u));
    }

    #[test]
    fn stored_intervals_are_disjoint_and_sorted(a in intervals()) {
        let u = IntervalUnion::from_intervals(a);
        prop_assert!(u.intervals().windows(2).all(|w| w[0].1 < w[1].0));
    }
}
