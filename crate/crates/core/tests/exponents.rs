use proptest::prelude::*;

use dioph::approx::{analytic_divergence, check_u_regular, ApproxFunction, Verdict};
use dioph::exponents::{check_transference, estimate_tau_d, ExpValue, ExponentConfig};
use dioph::real::RealVector;

fn point(s: &str) -> RealVector {
    s.parse().unwrap()
}

#[test]
fn rational_point_is_an_exact_resonance() {
    let e = estimate_tau_d(&point("1/2"), 1000, &ExponentConfig::default()).unwrap();
    assert!(e.is_exact_resonance);
    assert!(e.value.is_infinite());
}

#[test]
fn golden_ratio_is_near_one() {
    let e = estimate_tau_d(&point("golden"), 10_000, &ExponentConfig::default()).unwrap();
    match e.value {
        ExpValue::Finite(v) => assert!((0.95..1.2).contains(&v), "{v}"),
        ExpValue::Infinite => panic!("golden is not resonant"),
    }
}

#[test]
fn transference_sandwich() {
    assert!(check_transference(ExpValue::Finite(2.0), ExpValue::Finite(0.5), 2, 0.0).unwrap().pass);
    assert!(!check_transference(ExpValue::Finite(2.0), ExpValue::Finite(2.5), 2, 0.05).unwrap().pass);
    // ω_D = ∞ forces ω_S ≥ 1/(d−1)
    assert!(!check_transference(ExpValue::Infinite, ExpValue::Finite(0.5), 2, 0.05).unwrap().pass);
    assert!(check_transference(ExpValue::Finite(-1.0), ExpValue::Finite(0.5), 2, 0.0).is_err());
}

#[test]
fn divergence_presets() {
    let f: ApproxFunction = "q^-1/2".parse().unwrap();
    assert_eq!(analytic_divergence(&f, 2), Some(Verdict::Diverges));
    let g: ApproxFunction = "q^-1".parse().unwrap();
    assert_eq!(analytic_divergence(&g, 2), Some(Verdict::Converges));
}

#[test]
fn u_regularity_of_powers() {
    let f: ApproxFunction = "q^-1/2".parse().unwrap();
    assert!(check_u_regular(&f, 4, 1, 20).unwrap().holds);
    let flat: ApproxFunction = "const:1/2".parse().unwrap();
    assert!(check_u_regular(&flat, 3, 1, 10).unwrap().holds);
}

proptest! {
    #[test]
    fn equal_exponents_satisfy_transference(w in 0.0f64..10.0, d in 1u32..5) {
        prop_assert!(check_transference(ExpValue::Finite(w), ExpValue::Finite(w), d, 0.0).unwrap().pass);
    }

    #[test]
    fn power_psi_is_u_regular_for_any_base(num in 1i64..8, k in 2u64..8) {
        let f: ApproxFunction = format!("q^-{num}/8").parse().unwrap();
        prop_assert!(check_u_regular(&f, k, 1, 12).unwrap().holds);
    }
}
