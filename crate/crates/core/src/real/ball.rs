//! Arbitrary-precision interval arithmetic over dyadic endpoints.
//!
//! A [`Ball`] encloses a real number in `[lo·2^exp, hi·2^exp]` with integer
//! `lo ≤ hi`. Every operation rounds outward, so the true result of the
//! corresponding real operation is always contained in the output.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    lo: BigInt,
    hi: BigInt,
    exp: i64,
    prec: u32,
}

fn floor_shr(x: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    x.div_floor(&(BigInt::one() << s))
}

fn ceil_shr(x: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    -((-x).div_floor(&(BigInt::one() << s)))
}

fn bits(x: &BigInt) -> u64 {
    x.magnitude().bits()
}

impl Ball {
    fn from_parts(lo: BigInt, hi: BigInt, exp: i64, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        let mut b = Ball { lo, hi, exp, prec };
        b.normalize();
        b
    }

    fn normalize(&mut self) {
        let target = self.prec as u64 + 8;
        let m = bits(&self.lo).max(bits(&self.hi));
        if m > target {
            let s = m - target;
            self.lo = floor_shr(&self.lo, s);
            self.hi = ceil_shr(&self.hi, s);
            self.exp += s as i64;
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Self {
        Ball::from_parts(n.clone(), n.clone(), 0, prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Ball::from_int(&BigInt::from(n), prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let (n, d) = (r.numer(), r.denom());
        if d.is_one() {
            return Ball::from_int(n, prec);
        }
        let k = prec as i64 + 8 + bits(d) as i64 - bits(n) as i64;
        let (num, den) = if k >= 0 {
            (n << (k as u64), d.clone())
        } else {
            (n.clone(), d << ((-k) as u64))
        };
        let (q, rem) = num.div_mod_floor(&den);
        let hi = if rem.is_zero() { q.clone() } else { &q + 1 };
        Ball::from_parts(q, hi, -k, prec)
    }

    /// Enclosure of `√c` for a nonnegative integer `c`.
    pub fn sqrt_int(c: &BigInt, prec: u32) -> Self {
        assert!(!c.is_negative(), "square root of a negative integer");
        if c.is_zero() {
            return Ball::from_i64(0, prec);
        }
        let k = (prec as i64 + 8 - bits(c) as i64 / 2).max(0) as u64;
        let scaled = c << (2 * k);
        let r = scaled.sqrt();
        let hi = if &r * &r == scaled { r.clone() } else { &r + 1 };
        Ball::from_parts(r, hi, -(k as i64), prec)
    }

    pub fn with_precision(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.normalize();
        self
    }

    pub fn lower(&self) -> BigRational {
        scaled_rational(&self.lo, self.exp)
    }

    pub fn upper(&self) -> BigRational {
        scaled_rational(&self.hi, self.exp)
    }

    pub fn width(&self) -> BigRational {
        scaled_rational(&(&self.hi - &self.lo), self.exp)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Rigorous `f64` bounds `(down, up)` with `down ≤ lower()` and `upper() ≤ up`.
    pub fn f64_bounds(&self) -> (f64, f64) {
        (
            int_times_pow2_f64(&self.lo, self.exp, false),
            int_times_pow2_f64(&self.hi, self.exp, true),
        )
    }

    pub fn neg(&self) -> Self {
        Ball { lo: -&self.hi, hi: -&self.lo, exp: self.exp, prec: self.prec }
    }

    pub fn add(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        let e = self.exp.min(o.exp);
        let (a_lo, a_hi) = self.aligned(e);
        let (b_lo, b_hi) = o.aligned(e);
        Ball::from_parts(a_lo + b_lo, a_hi + b_hi, e, prec)
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        self.add(&o.neg())
    }

    fn aligned(&self, e: i64) -> (BigInt, BigInt) {
        let s = (self.exp - e) as u64;
        (&self.lo << s, &self.hi << s)
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        let prec = self.prec.max(o.prec);
        let p = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        Ball::from_parts(lo, hi, self.exp + o.exp, prec)
    }

    pub fn mul_pow2(&self, k: i64) -> Ball {
        Ball { lo: self.lo.clone(), hi: self.hi.clone(), exp: self.exp + k, prec: self.prec }
    }

    pub fn square(&self) -> Ball {
        if self.contains_zero() {
            let a = self.lo.abs().max(self.hi.abs());
            return Ball::from_parts(BigInt::zero(), &a * &a, 2 * self.exp, self.prec);
        }
        self.mul(self)
    }

    /// Reciprocal; `None` when the enclosure contains zero.
    pub fn recip(&self) -> Option<Ball> {
        if self.contains_zero() {
            return None;
        }
        if self.is_negative() {
            return self.neg().recip().map(|r| r.neg());
        }
        let k = self.prec as u64 + 8 + bits(&self.hi);
        let num = BigInt::one() << k;
        let lo = num.div_floor(&self.hi);
        let (q, r) = num.div_mod_floor(&self.lo);
        let hi = if r.is_zero() { q } else { q + 1 };
        Some(Ball::from_parts(lo, hi, -(k as i64) - self.exp, self.prec))
    }

    pub fn div(&self, o: &Ball) -> Option<Ball> {
        o.recip().map(|r| self.mul(&r))
    }

    /// Widens the enclosure by `±2^e`; a magnitude bound of an exact zero leaves it unchanged.
    fn widen_pow2(&self, e: i64) -> Ball {
        if e < i64::MIN / 8 {
            return self.clone();
        }
        let eps = Ball::from_parts(BigInt::from(-1), BigInt::one(), e, self.prec);
        self.add(&eps)
    }

    /// Magnitude bound: the least `e` with `|x| ≤ 2^e` for all enclosed `x`.
    fn mag_log2(&self) -> i64 {
        if self.lo.is_zero() && self.hi.is_zero() {
            return i64::MIN / 4;
        }
        let m = bits(&self.lo).max(bits(&self.hi)) as i64;
        m + self.exp
    }

    pub fn hull(&self, o: &Ball) -> Ball {
        let e = self.exp.min(o.exp);
        let (a_lo, a_hi) = self.aligned(e);
        let (b_lo, b_hi) = o.aligned(e);
        Ball::from_parts(a_lo.min(b_lo), a_hi.max(b_hi), e, self.prec.max(o.prec))
    }

    /// Enclosure of `max(x, y)` over `x ∈ self`, `y ∈ o`.
    pub fn max(&self, o: &Ball) -> Ball {
        let e = self.exp.min(o.exp);
        let (a_lo, a_hi) = self.aligned(e);
        let (b_lo, b_hi) = o.aligned(e);
        Ball::from_parts(a_lo.max(b_lo), a_hi.max(b_hi), e, self.prec.max(o.prec))
    }

    fn lower_point(&self) -> Ball {
        Ball::from_parts(self.lo.clone(), self.lo.clone(), self.exp, self.prec)
    }

    fn upper_point(&self) -> Ball {
        Ball::from_parts(self.hi.clone(), self.hi.clone(), self.exp, self.prec)
    }

    /// Natural logarithm; `None` unless the enclosure is strictly positive.
    pub fn ln(&self) -> Option<Ball> {
        if !self.is_positive() {
            return None;
        }
        let a = ln_point(&self.lo, self.exp, self.prec);
        if self.is_point() {
            return Some(a);
        }
        let b = ln_point(&self.hi, self.exp, self.prec);
        Some(a.hull(&b))
    }

    pub fn exp(&self) -> Option<Ball> {
        let a = exp_point(&self.lower_point())?;
        if self.is_point() {
            return Some(a);
        }
        let b = exp_point(&self.upper_point())?;
        Some(a.hull(&b))
    }

    /// `self^e` for a rational exponent, `self > 0`.
    pub fn pow_rational(&self, e: &BigRational) -> Option<Ball> {
        if e.is_zero() {
            return Some(Ball::from_i64(1, self.prec));
        }
        let l = self.ln()?;
        l.mul(&Ball::from_rational(e, self.prec + 16)).exp()
    }
}

fn scaled_rational(m: &BigInt, exp: i64) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(m << (exp as u64))
    } else {
        BigRational::new(m.clone(), BigInt::one() << ((-exp) as u64))
    }
}

/// `m·2^exp` as an f64, rounded down (`up = false`) or up.
fn int_times_pow2_f64(m: &BigInt, exp: i64, up: bool) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let b = bits(m) as i64;
    // keep 60 significant bits so the integer converts without overflow
    let (mm, e) = if b > 60 {
        let s = (b - 60) as u64;
        if up {
            (ceil_shr(m, s), exp + s as i64)
        } else {
            (floor_shr(m, s), exp + s as i64)
        }
    } else {
        (m.clone(), exp)
    };
    let v = mm.to_i64().expect("60-bit mantissa fits in i64");
    // i64 -> f64 rounds to nearest; step outward by one ulp
    let f = v as f64;
    let f = if up {
        if (f as i128) < v as i128 { f.next_up() } else { f }
    } else if (f as i128) > v as i128 {
        f.next_down()
    } else {
        f
    };
    let scaled = ldexp(f, e);
    if scaled == 0.0 && up {
        return f64::from_bits(1);
    }
    scaled
}

pub(crate) fn ldexp(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `2·atanh(s)` for an enclosure `s` with `|s| ≤ 1/3`, absolute error below `2^-(prec+4)`.
fn two_atanh(s: &Ball, prec: u32) -> Ball {
    let s2 = s.square();
    let mut power = s.clone();
    let mut sum = s.clone();
    let mut k: i64 = 1;
    let target = -(prec as i64) - 6;
    loop {
        power = power.mul(&s2);
        k += 2;
        let term = power.mul(&Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(k)), prec));
        sum = sum.add(&term);
        if power.mag_log2() < target {
            break;
        }
    }
    // tail Σ_{j>k} |s|^j/j ≤ |s|^{k+2}/(1 - s²) ≤ 2|s|^{k}·s², bounded by 2^(mag(power)+1)
    let tail = power.mul(&s2).mag_log2() + 1;
    sum.widen_pow2(tail).mul_pow2(1)
}

pub(crate) fn ln2(prec: u32) -> Ball {
    let third = Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(3)), prec);
    two_atanh(&third, prec)
}

fn ln_point(m: &BigInt, exp: i64, prec: u32) -> Ball {
    let wp = prec + 32;
    debug_assert!(m.sign() == Sign::Plus);
    let b = bits(m) as i64;
    // value = f·2^k with f = m / 2^(b-1) ∈ [1, 2)
    let mut k = b - 1 + exp;
    let half = BigInt::one() << ((b - 1) as u64);
    // f > 1.5 ⇒ use f/2 ∈ (0.75, 1)
    let (num, den) = if m * 2 > &half * 3 {
        k += 1;
        (m - (&half << 1u32), m + (&half << 1u32))
    } else {
        (m - &half, m + &half)
    };
    let s = Ball::from_rational(&BigRational::new(num, den), wp);
    let mut r = two_atanh(&s, wp);
    if k != 0 {
        r = r.add(&ln2(wp).mul(&Ball::from_i64(k, wp)));
    }
    r.with_precision(prec)
}

fn exp_point(y: &Ball) -> Option<Ball> {
    let prec = y.prec;
    let wp = prec + 32;
    let yf = int_times_pow2_f64(&y.lo, y.exp, false);
    if !yf.is_finite() || yf.abs() > 1e15 {
        return None;
    }
    let k = (yf / std::f64::consts::LN_2).round() as i64;
    let mut r = y.clone().with_precision(wp);
    if k != 0 {
        r = r.sub(&ln2(wp + 64).mul(&Ball::from_i64(k, wp)));
    }
    // argument halving: exp(r) = exp(r/2^h)^(2^h)
    let h: i64 = 10;
    let r = r.mul_pow2(-h);
    let mut term = Ball::from_i64(1, wp);
    let mut sum = Ball::from_i64(1, wp);
    let target = -(wp as i64) - 8;
    let mut i: i64 = 0;
    loop {
        i += 1;
        term = term.mul(&r).mul(&Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(i)), wp));
        sum = sum.add(&term);
        if term.mag_log2() < target {
            break;
        }
    }
    // |r| < 1 so the tail is at most twice the last term
    let mut v = sum.widen_pow2(term.mag_log2() + 1);
    for _ in 0..h {
        v = v.square();
    }
    Some(v.mul_pow2(k).with_precision(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_enclosure_contains_value() {
        let b = Ball::from_rational(&r(1, 3), 64);
        assert!(b.lower() <= r(1, 3) && r(1, 3) <= b.upper());
        assert!(b.width() < r(1, 1 << 60));
    }

    #[test]
    fn sqrt_two_digits() {
        let b = Ball::sqrt_int(&BigInt::from(2), 100);
        let (lo, hi) = b.f64_bounds();
        assert!(lo <= std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= hi);
        assert!(hi - lo < 1e-15);
    }

    #[test]
    fn ln_and_exp_roundtrip() {
        let x = Ball::from_i64(10, 128);
        let l = x.ln().unwrap();
        let (lo, hi) = l.f64_bounds();
        assert!(lo <= 10f64.ln() + 1e-15 && 10f64.ln() - 1e-15 <= hi);
        let back = l.exp().unwrap();
        assert!(back.lower() <= r(10, 1) && r(10, 1) <= back.upper());
        assert!(back.width() < r(1, 1 << 50));
    }

    #[test]
    fn ln_of_powers_of_two() {
        let l = Ball::from_i64(8, 128).ln().unwrap();
        let (lo, hi) = l.f64_bounds();
        assert!(lo <= 8f64.ln() + 1e-15 && 8f64.ln() - 1e-15 <= hi);
        assert!(Ball::from_i64(1, 128).ln().unwrap().contains_zero());
    }

    #[test]
    fn ln2_matches_known_digits() {
        // ln 2 = 0.693147180559945309417232121458176568...
        let l = ln2(200);
        let lo = r(693147180559945309, 1_000_000_000_000_000_000);
        let hi = r(693147180559945310, 1_000_000_000_000_000_000);
        assert!(l.lower() > lo && l.upper() < hi);
    }

    #[test]
    fn exp_of_negative_argument() {
        let y = Ball::from_rational(&r(-7, 2), 128);
        let e = y.exp().unwrap();
        let (lo, hi) = e.f64_bounds();
        let truth = (-3.5f64).exp();
        assert!(lo <= truth * (1.0 + 1e-15) && truth * (1.0 - 1e-15) <= hi);
    }

    #[test]
    fn recip_of_interval_containing_zero_is_none() {
        let a = Ball::from_i64(-1, 64).hull(&Ball::from_i64(1, 64));
        assert!(a.recip().is_none());
    }
}
