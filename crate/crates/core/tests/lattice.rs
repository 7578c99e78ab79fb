use num_bigint::BigInt;
use num_rational::BigRational;

use dioph::counting::{count_q, CountQuery, Delta};
use dioph::lattice::{build_lattice, count_lattice_points, verify_nalpha_bound, BoundVerdict, DEFAULT_N_MIN};
use dioph::real::{RealVector, Threshold};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn point(s: &str) -> RealVector {
    s.parse().unwrap()
}

// Frozen from oracles/small_counts.py.
#[test]
fn lattice_counts_match_oracle() {
    let spec = build_lattice(&point("sqrt2m1"), 1000, &q(1, 10), 64).unwrap();
    assert_eq!(count_lattice_points(&spec).unwrap(), 399);
    let spec = build_lattice(&point("sqrt(2),sqrt(3)"), 300, &q(1, 5), 64).unwrap();
    assert_eq!(count_lattice_points(&spec).unwrap(), 99);
}

#[test]
fn lattice_is_unimodular_and_radii_agree() {
    let spec = build_lattice(&point("sqrt(2),sqrt(3)"), 10_000, &q(1, 7), 80).unwrap();
    assert!(spec.is_unimodular());
    assert!(spec.r.lower() <= spec.r_alt.upper() && spec.r_alt.lower() <= spec.r.upper());
    // t = ℓ/(ℓ+1)·ln(N/δ)
    let t = 2.0 / 3.0 * (70_000f64).ln();
    assert!((spec.t.midpoint_f64() - t).abs() < 1e-12);
}

#[test]
fn lattice_count_is_symmetric_fiber_count() {
    let x = point("golden,1/3");
    let spec = build_lattice(&x, 500, &q(1, 4), 64).unwrap();
    let one_sided = count_q(&CountQuery::new(x, Delta::rational(q(1, 4)), 0, 499)).unwrap().count;
    assert_eq!(count_lattice_points(&spec).unwrap(), 2 * one_sided + 1);
}

// Frozen from oracles/nalpha_counts.py.
#[test]
fn nalpha_bound_for_badly_approximable_point() {
    for (n, expected) in [(1_000u64, 19u64), (10_000, 43), (100_000, 92)] {
        let delta = Threshold::power(n, -q(2, 3));
        let r = verify_nalpha_bound(&point("sqrt2m1"), &q(3, 2), n, &delta, DEFAULT_N_MIN).unwrap();
        assert_eq!(r.count, expected);
        assert_eq!(r.verdict, BoundVerdict::Pass);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(build_lattice(&point("sqrt2m1"), 0, &q(1, 10), 64).is_err());
    assert!(build_lattice(&point("sqrt2m1"), 10, &q(3, 2), 64).is_err());
}
