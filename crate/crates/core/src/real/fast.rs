//! Double-precision interval arithmetic with outward rounding.
//!
//! Each primitive rounds to nearest and then steps one ulp outward, so the
//! enclosures are rigorous without touching the FPU rounding mode. The
//! elementary functions are evaluated by series with explicit tail bounds
//! and do not depend on the platform `libm`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FInterval {
    pub lo: f64,
    pub hi: f64,
}

// ln 2 = 0.6931471805599453094172321...; the nearest double lies below it.
pub(crate) const LN2_LO: f64 = 0.693_147_180_559_945_3;

fn ln2() -> FInterval {
    FInterval { lo: LN2_LO, hi: LN2_LO.next_up() }
}

#[inline]
fn down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn up(x: f64) -> f64 {
    x.next_up()
}

impl FInterval {
    pub fn point(x: f64) -> Self {
        FInterval { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        FInterval { lo, hi }
    }

    /// Integers up to 2^53 convert exactly.
    pub fn from_u64(n: u64) -> Self {
        let f = n as f64;
        if f as u128 == n as u128 {
            FInterval::point(f)
        } else {
            FInterval { lo: down(f), hi: up(f) }
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            return FInterval::point(0.0);
        }
        let n = FInterval::from_bigint(r.numer());
        let d = FInterval::from_bigint(r.denom());
        n.div(&d)
    }

    fn from_bigint(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) if v.unsigned_abs() < (1u64 << 53) => FInterval::point(v as f64),
            _ => {
                let f = n.to_f64().unwrap_or(f64::INFINITY);
                FInterval { lo: down(f), hi: up(f) }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        FInterval { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        FInterval { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }

    pub fn neg(&self) -> Self {
        FInterval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FInterval { lo: down(lo), hi: up(hi) }
    }

    pub fn div(&self, o: &Self) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing zero");
        let p = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FInterval { lo: down(lo), hi: up(hi) }
    }

    pub fn mul_pow2(&self, k: i32) -> Self {
        let s = 2f64.powi(k);
        FInterval { lo: self.lo * s, hi: self.hi * s }
    }

    pub fn hull(&self, o: &Self) -> Self {
        FInterval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn max(&self, o: &Self) -> Self {
        FInterval { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }

    fn widen(&self, r: f64) -> Self {
        FInterval { lo: down(self.lo - r), hi: up(self.hi + r) }
    }

    pub fn ln(&self) -> Option<Self> {
        if !(self.lo > 0.0) || !self.hi.is_finite() {
            return None;
        }
        let a = ln_point(self.lo);
        if self.lo == self.hi {
            return Some(a);
        }
        Some(a.hull(&ln_point(self.hi)))
    }

    pub fn exp(&self) -> Option<Self> {
        let a = exp_point(self.lo)?;
        if self.lo == self.hi {
            return Some(a);
        }
        Some(a.hull(&exp_point(self.hi)?))
    }

    /// Relative width, used to decide whether the fast path is informative.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn ln_point(x: f64) -> FInterval {
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    assert!(raw_exp != 0, "subnormal input to ln");
    // x = m·2^k exactly, m ∈ [1, 2)
    let mut k = raw_exp - 1023;
    let mut m = f64::from_bits((bits & ((1u64 << 52) - 1)) | (1023u64 << 52));
    if m > 1.5 {
        m *= 0.5;
        k += 1;
    }
    let mi = FInterval::point(m);
    let one = FInterval::point(1.0);
    let s = mi.sub(&one).div(&mi.add(&one));
    let s2 = s.mul(&s);
    let mut power = s;
    let mut sum = s;
    let mut j = 1.0;
    for _ in 0..14 {
        power = power.mul(&s2);
        j += 2.0;
        sum = sum.add(&power.div(&FInterval::point(j)));
    }
    // |s| ≤ 1/5: tail ≤ |s|^{j+2}/(1 - s²) ≤ 2·|s|^{j+2}
    let tail = 2.0 * power.lo.abs().max(power.hi.abs()) * s2.hi;
    let at = sum.widen(up(tail)).mul_pow2(1);
    if k == 0 {
        at
    } else {
        at.add(&ln2().mul(&FInterval::point(k as f64)))
    }
}

fn exp_point(y: f64) -> Option<FInterval> {
    if !y.is_finite() || y.abs() > 700.0 {
        return None;
    }
    let k = (y / std::f64::consts::LN_2).round();
    let r = FInterval::point(y).sub(&ln2().mul(&FInterval::point(k)));
    let mut term = FInterval::point(1.0);
    let mut sum = FInterval::point(1.0);
    for i in 1..=22 {
        term = term.mul(&r).div(&FInterval::point(i as f64));
        sum = sum.add(&term);
    }
    // |r| ≤ 0.35: tail ≤ 2·|last term|·|r|
    let tail = 2.0 * term.lo.abs().max(term.hi.abs()) * r.lo.abs().max(r.hi.abs());
    Some(sum.widen(up(tail)).mul_pow2(k as i32))
}

/// Rigorous f64 enclosure of a big rational scaled into `[lo, hi]`.
pub fn rational_bounds(r: &BigRational) -> (f64, f64) {
    let f = FInterval::from_rational(r);
    (f.lo, f.hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_encloses_reference_values() {
        for &x in &[2.0, 3.0, 10.0, 0.1, 1e6, 123456.789, 1.0] {
            let l = FInterval::point(x).ln().unwrap();
            let r = x.ln();
            assert!(l.lo <= r && r <= l.hi, "ln({x}) = {r} not in {l:?}");
            assert!(l.width() < 1e-13 * r.abs().max(1.0));
        }
    }

    #[test]
    fn exp_encloses_reference_values() {
        for &y in &[0.0, 1.0, -1.0, -13.8, 20.5, 0.3] {
            let e = FInterval::point(y).exp().unwrap();
            let r = y.exp();
            assert!(e.lo <= r * (1.0 + 4e-16) && r * (1.0 - 4e-16) <= e.hi);
            assert!(e.width() < 1e-13 * r);
        }
    }

    #[test]
    fn ln2_constant_brackets_true_value() {
        use crate::real::ball;
        let b = ball::ln2(128);
        let (lo, hi) = b.f64_bounds();
        assert!(LN2_LO <= lo && hi <= LN2_LO.next_up());
    }

    #[test]
    fn rational_third() {
        let r = BigRational::new(1.into(), 3.into());
        let (lo, hi) = rational_bounds(&r);
        assert!(lo < 1.0 / 3.0 + 1e-17 && hi > 1.0 / 3.0 - 1e-17 && lo < hi);
    }
}
