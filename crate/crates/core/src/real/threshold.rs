//! Comparison thresholds `δ` in `‖qx‖ < δ`.
//!
//! A threshold is the maximum of finitely many monomials
//! `c · B^a · (ln B)^b` with rational `c, a, b` and a positive integer
//! base `B`. This covers rational constants, powers `q^-a`, power-log
//! functions and the safety function `(q·ln²q)^(-1/d)` evaluated at a fixed
//! integer `q`, as well as their pointwise maxima.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use super::ball::Ball;
use super::certified::CertifiedValue;
use super::fast::FInterval;
use super::surd::{Surd, DEFAULT_PRECISION, MAX_PRECISION};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coef: BigRational,
    pub base: BigInt,
    pub pow: BigRational,
    pub log_pow: BigRational,
}

impl Monomial {
    pub fn constant(c: BigRational) -> Self {
        Monomial { coef: c, base: BigInt::one(), pow: BigRational::zero(), log_pow: BigRational::zero() }
    }

    /// `coef·base^pow` when that product is rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coef.is_zero() {
            return Some(BigRational::zero());
        }
        if !self.log_pow.is_zero() {
            return None;
        }
        if self.pow.is_zero() || self.base.is_one() {
            return Some(self.coef.clone());
        }
        let n = self.pow.numer();
        let m = self.pow.denom().to_u32()?;
        let e = n.abs().to_u32()?;
        let b = Pow::pow(&self.base, e);
        let root = b.nth_root(m);
        if Pow::pow(&root, m) != b {
            return None;
        }
        let v = if n.is_negative() {
            BigRational::new(BigInt::one(), root)
        } else {
            BigRational::from_integer(root)
        };
        Some(&self.coef * v)
    }

    /// Exact comparison of two algebraic monomials.
    fn cmp_algebraic(&self, o: &Monomial) -> Option<Ordering> {
        if !self.is_algebraic() || !o.is_algebraic() {
            return None;
        }
        let m = num_integer::Integer::lcm(self.pow.denom(), o.pow.denom());
        let mu = m.to_u32()?;
        let side = |t: &Monomial| -> Option<BigRational> {
            let e = (&t.pow * BigRational::from_integer(m.clone())).to_integer();
            let eu = e.abs().to_u32()?;
            let bp = BigRational::from_integer(Pow::pow(&t.base, eu));
            let bp = if e.is_negative() { bp.recip() } else { bp };
            Some(Pow::pow(&t.coef, mu) * bp)
        };
        Some(side(self)?.cmp(&side(o)?))
    }

    /// `self^d`.
    pub fn powi(&self, d: u32) -> Monomial {
        let k = BigRational::from_integer(BigInt::from(d));
        Monomial {
            coef: Pow::pow(&self.coef, d),
            base: self.base.clone(),
            pow: &self.pow * &k,
            log_pow: &self.log_pow * &k,
        }
    }

    /// `r·self` for `r ≥ 0`.
    pub fn scale(&self, r: &BigRational) -> Monomial {
        Monomial { coef: &self.coef * r, ..self.clone() }
    }

    fn is_algebraic(&self) -> bool {
        self.log_pow.is_zero()
    }

    pub fn enclosure_f64(&self) -> FInterval {
        if let Some(r) = self.as_rational() {
            return FInterval::from_rational(&r);
        }
        let c = FInterval::from_rational(&self.coef);
        let lb = FInterval::from_rational(&BigRational::from_integer(self.base.clone())).ln().expect("base ≥ 1");
        let mut e = lb.mul(&FInterval::from_rational(&self.pow));
        if !self.log_pow.is_zero() {
            let llb = lb.ln().expect("log term requires base ≥ 2");
            e = e.add(&llb.mul(&FInterval::from_rational(&self.log_pow)));
        }
        match e.exp() {
            Some(v) => c.mul(&v),
            // out of double range: fall back to a trivially valid enclosure
            None => FInterval::new(0.0, f64::INFINITY),
        }
    }

    pub fn ball(&self, prec: u32) -> Ball {
        if let Some(r) = self.as_rational() {
            return Ball::from_rational(&r, prec);
        }
        let wp = prec + 16;
        let c = Ball::from_rational(&self.coef, wp);
        let lb = Ball::from_int(&self.base, wp).ln().expect("base ≥ 1");
        let mut e = lb.mul(&Ball::from_rational(&self.pow, wp));
        if !self.log_pow.is_zero() {
            let llb = lb.ln().expect("log term requires base ≥ 2");
            e = e.add(&llb.mul(&Ball::from_rational(&self.log_pow, wp)));
        }
        c.mul(&e.exp().expect("exponent in range")).with_precision(prec)
    }

    /// Exact comparison of `self` with `v ≥ 0`.
    fn cmp_value(&self, v: &Surd) -> Result<Ordering> {
        if self.coef.is_zero() {
            return Ok(v.signum()?.reverse());
        }
        if let Some(r) = self.as_rational() {
            return Surd::from_rational(r).cmp_exact(v);
        }
        if self.is_algebraic() {
            // c·B^(n/m) vs v  ⟺  c^m·B^max(n,0) vs v^m·B^max(-n,0)
            let n = self.pow.numer();
            let m = self.pow.denom().to_u32().ok_or_else(|| Error::InvalidInput("exponent denominator too large".into()))?;
            let e = n.abs().to_u32().ok_or_else(|| Error::InvalidInput("exponent numerator too large".into()))?;
            let bpow = BigRational::from_integer(Pow::pow(&self.base, e));
            let cm = Pow::pow(&self.coef, m);
            let vm = v.pow(m);
            let (lhs, rhs) = if n.is_negative() { (vm.scale(&bpow), cm) } else { (vm, cm * bpow) };
            return Surd::from_rational(rhs).cmp_exact(&lhs);
        }
        // transcendental, so never equal to the algebraic v
        let mut prec = DEFAULT_PRECISION;
        loop {
            let vb = v.enclose(prec);
            let tb = self.ball(prec);
            if vb.upper() < tb.lower() {
                return Ok(Ordering::Greater);
            }
            if vb.lower() > tb.upper() {
                return Ok(Ordering::Less);
            }
            if prec >= MAX_PRECISION {
                return Err(Error::PrecisionExhausted { context: format!("{v} vs {self}"), bits: prec });
            }
            prec = (prec * 2).min(MAX_PRECISION);
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coef)?;
        if !self.pow.is_zero() && !self.base.is_one() {
            write!(f, "*{}^({})", self.base, self.pow)?;
        }
        if !self.log_pow.is_zero() {
            write!(f, "*ln({})^({})", self.base, self.log_pow)?;
        }
        Ok(())
    }
}

/// Enclosure of a threshold in units of `2^-128`, for the fixed-point scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedThreshold {
    pub lo: u128,
    pub hi: u128,
}

impl FixedThreshold {
    /// Every distance `≤ 1/2` lies strictly below the threshold.
    pub fn always(&self) -> bool {
        self.lo > (1u128 << 127)
    }

    pub fn never(&self) -> bool {
        self.hi == 0
    }
}

fn f64_to_fixed_floor(x: f64) -> u128 {
    if x <= 0.0 {
        0
    } else {
        (x * 2f64.powi(128)).floor() as u128
    }
}

fn f64_to_fixed_ceil(x: f64) -> u128 {
    if x <= 0.0 {
        0
    } else {
        (x * 2f64.powi(128)).ceil() as u128
    }
}

pub(crate) fn rational_to_fixed(r: &BigRational) -> FixedThreshold {
    if !r.is_positive() {
        return FixedThreshold { lo: 0, hi: 0 };
    }
    if r >= &BigRational::one() {
        return FixedThreshold { lo: u128::MAX, hi: u128::MAX };
    }
    let scaled = r * BigRational::from_integer(BigInt::one() << 128u32);
    let lo = scaled.floor().to_integer().to_u128().unwrap_or(u128::MAX);
    let hi = scaled.ceil().to_integer().to_u128().unwrap_or(u128::MAX);
    FixedThreshold { lo, hi }
}

/// The maximum of a list of monomials; the empty list is the zero threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    terms: Vec<Monomial>,
}

impl Threshold {
    pub fn zero() -> Self {
        Threshold { terms: Vec::new() }
    }

    pub fn rational(r: BigRational) -> Self {
        Threshold { terms: vec![Monomial::constant(r)] }
    }

    pub fn monomial(m: Monomial) -> Self {
        Threshold { terms: vec![m] }
    }

    /// `base^pow`, e.g. `N^(-1/τ)`.
    pub fn power(base: impl Into<BigInt>, pow: BigRational) -> Self {
        Threshold::monomial(Monomial { coef: BigRational::one(), base: base.into(), pow, log_pow: BigRational::zero() })
    }

    pub fn max(mut self, other: Threshold) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// `self^d`; the maximum commutes with powers of nonnegative values.
    pub fn powi(&self, d: u32) -> Threshold {
        Threshold { terms: self.terms.iter().map(|t| t.powi(d)).collect() }
    }

    /// `r·self` for `r ≥ 0`.
    pub fn scale(&self, r: &BigRational) -> Threshold {
        Threshold { terms: self.terms.iter().map(|t| t.scale(r)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef.is_zero())
    }

    /// The largest term when every term is algebraic.
    fn algebraic_max(&self) -> Option<&Monomial> {
        let mut best: Option<&Monomial> = None;
        for t in &self.terms {
            best = Some(match best {
                None => t,
                Some(b) => match t.cmp_algebraic(b)? {
                    Ordering::Greater => t,
                    _ => b,
                },
            });
        }
        best
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let mut best: Option<BigRational> = None;
        for t in &self.terms {
            let r = t.as_rational()?;
            best = Some(match best {
                Some(b) if b >= r => b,
                _ => r,
            });
        }
        Some(best.unwrap_or_else(BigRational::zero))
    }

    pub fn enclosure_f64(&self) -> FInterval {
        let mut it = self.terms.iter().map(|t| t.enclosure_f64());
        match it.next() {
            None => FInterval::point(0.0),
            Some(first) => it.fold(first, |a, b| a.max(&b)),
        }
    }

    pub fn fixed(&self) -> FixedThreshold {
        if let Some(r) = self.as_rational() {
            return rational_to_fixed(&r);
        }
        let e = self.enclosure_f64();
        FixedThreshold { lo: f64_to_fixed_floor(e.lo), hi: f64_to_fixed_ceil(e.hi) }
    }

    pub fn ball(&self, prec: u32) -> Ball {
        let mut it = self.terms.iter().map(|t| t.ball(prec));
        match it.next() {
            None => Ball::from_i64(0, prec),
            Some(first) => it.fold(first, |a, b| a.max(&b)),
        }
    }

    /// Exact comparison of the maximum with `v ≥ 0`.
    pub fn cmp_value(&self, v: &Surd) -> Result<Ordering> {
        if self.terms.is_empty() {
            return Ok(v.signum()?.reverse());
        }
        let mut best = Ordering::Less;
        for t in &self.terms {
            match t.cmp_value(v)? {
                Ordering::Greater => return Ok(Ordering::Greater),
                Ordering::Equal => best = Ordering::Equal,
                Ordering::Less => {}
            }
        }
        Ok(best)
    }

    /// Exact decision of `v < self` for `v ≥ 0`, using strict inequality.
    pub fn exceeds(&self, v: &Surd) -> Result<bool> {
        Ok(self.cmp_value(v)? == Ordering::Greater)
    }

    /// `v ≤ self` for `v ≥ 0`.
    pub fn at_least(&self, v: &Surd) -> Result<bool> {
        Ok(self.cmp_value(v)? != Ordering::Less)
    }

    pub fn certified(&self, precision_bits: u32) -> Result<CertifiedValue> {
        if let Some(r) = self.as_rational() {
            return Ok(CertifiedValue::exact(r, precision_bits));
        }
        CertifiedValue::from_balls(|p| Ok(self.ball(p)), precision_bits, &self.to_string())
    }

    /// Exact comparison of two thresholds when both are algebraic monomials
    /// of a common shape; general fallback by refinement.
    pub fn cmp(&self, other: &Threshold) -> Result<Ordering> {
        if let (Some(a), Some(b)) = (self.as_rational(), other.as_rational()) {
            return Ok(a.cmp(&b));
        }
        if self == other {
            return Ok(Ordering::Equal);
        }
        if let (Some(a), Some(b)) = (self.algebraic_max(), other.algebraic_max()) {
            if let Some(o) = a.cmp_algebraic(b) {
                return Ok(o);
            }
        }
        let mut prec = DEFAULT_PRECISION;
        loop {
            let a = self.ball(prec);
            let b = other.ball(prec);
            if a.upper() < b.lower() {
                return Ok(Ordering::Less);
            }
            if a.lower() > b.upper() {
                return Ok(Ordering::Greater);
            }
            if prec >= MAX_PRECISION {
                return Err(Error::PrecisionExhausted { context: format!("{self} vs {other}"), bits: prec });
            }
            prec = (prec * 2).min(MAX_PRECISION);
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.terms.len() {
            0 => write!(f, "0"),
            1 => write!(f, "{}", self.terms[0]),
            _ => {
                write!(f, "max(")?;
                for (i, t) in self.terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn algebraic_thresholds_compare_exactly() {
        let a = Threshold::power(10_000, q(-2, 3));
        let b = Threshold::power(10, q(-8, 3));
        assert_eq!(a.cmp(&b).unwrap(), Ordering::Equal);
        let c = Threshold::power(10, q(-5, 2));
        assert_eq!(a.cmp(&c).unwrap(), Ordering::Less);
    }

    #[test]
    fn perfect_powers_are_rational() {
        let t = Threshold::power(4, q(-1, 2));
        assert_eq!(t.as_rational(), Some(q(1, 2)));
        let t = Threshold::power(8, q(-2, 3));
        assert_eq!(t.as_rational(), Some(q(1, 4)));
        assert_eq!(Threshold::power(2, q(-1, 2)).as_rational(), None);
    }

    #[test]
    fn algebraic_boundary_is_strict() {
        // ‖4·(1/8)‖ = 1/2 is not below 4^(-1/2) = 1/2
        let t = Threshold::power(4, q(-1, 2));
        assert!(!t.exceeds(&Surd::from_rational(q(1, 2))).unwrap());
        // √2/4 < 2^(-1/2) = √2/2
        let t = Threshold::power(2, q(-1, 2));
        assert!(t.exceeds(&Surd::sqrt_term(q(1, 4), 2)).unwrap());
        assert!(!t.exceeds(&Surd::sqrt_term(q(1, 2), 2)).unwrap());
    }

    #[test]
    fn transcendental_comparison_refines() {
        // φ(8) for d = 2 is (8 ln²8)^(-1/2) ≈ 0.170023
        let m = Monomial { coef: q(1, 1), base: BigInt::from(8), pow: q(-1, 2), log_pow: q(-1, 1) };
        let t = Threshold::monomial(m);
        assert!(t.exceeds(&Surd::from_rational(q(170_023, 1_000_000))).unwrap());
        assert!(!t.exceeds(&Surd::from_rational(q(170_024, 1_000_000))).unwrap());
        let f = t.enclosure_f64();
        assert!(f.lo < 0.170_023_241_099_465 && 0.170_023_241_099_464 < f.hi);
    }

    #[test]
    fn fixed_enclosure_brackets_value() {
        let t = Threshold::power(10, q(-9, 20));
        let fx = t.fixed();
        let v = 10f64.powf(-0.45) * 2f64.powi(128);
        assert!((fx.lo as f64) <= v * (1.0 + 1e-12) && v * (1.0 - 1e-12) <= fx.hi as f64);
        assert!(fx.lo <= fx.hi);
    }
}
