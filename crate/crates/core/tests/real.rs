use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use dioph::real::{RealExpr, RealVector, Surd};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

#[test]
fn named_constants_parse() {
    let v: RealVector = "golden,sqrt2m1,1/3".parse().unwrap();
    assert_eq!(v.dim(), 3);
    let f: Vec<f64> = v.iter().map(|c| c.value().to_f64()).collect();
    assert!((f[0] - 0.618_033_988_749_894_9).abs() < 1e-12);
    assert!((f[1] - 0.414_213_562_373_095_1).abs() < 1e-12);
    assert!("sqrt(".parse::<RealVector>().is_err());
}

#[test]
fn surd_arithmetic_is_exact() {
    let r2 = Surd::sqrt_term(q(1, 1), 2);
    assert_eq!(r2.mul(&r2).as_rational(), Some(q(2, 1)));
    let s8 = Surd::sqrt_term(q(1, 1), 8);
    assert_eq!(s8.sub(&r2.scale(&q(2, 1))).as_rational(), Some(q(0, 1)));
    assert_eq!(r2.floor().unwrap(), BigInt::from(1));
}

proptest! {
    #[test]
    fn floor_brackets_value(a in -50i64..50, ad in 1i64..20, b in -20i64..20, c in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10, 11])) {
        let x = RealExpr::quadratic(q(a, ad), q(b, 7), c);
        let v = x.value();
        let f = v.floor().unwrap();
        let fx = v.to_f64();
        let fl: f64 = f.to_string().parse().unwrap();
        prop_assert!(fl <= fx + 1e-9 && fx < fl + 1.0 + 1e-9);
    }

    #[test]
    fn nearest_int_dist_is_at_most_half(a in -1000i64..1000, d in 1i64..300, b in 1i64..9) {
        let v = RealExpr::quadratic(q(a, d), q(b, 3), 3).value().clone();
        let dist = v.nearest_int_dist().unwrap().to_f64();
        prop_assert!((0.0..=0.5 + 1e-12).contains(&dist));
    }
}
