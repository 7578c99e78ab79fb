//! Exact arithmetic in multiquadratic fields.
//!
//! A [`Surd`] is a finite sum `Σ r_s·√s` with rational coefficients over
//! distinct squarefree radicands `s ≥ 1`. Square roots of distinct
//! squarefree integers are linearly independent over ℚ, so a surd is zero
//! exactly when all of its coefficients vanish; every other sign question is
//! settled by refining a [`Ball`] enclosure until it excludes zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ball::Ball;
use crate::error::{Error, Result};

/// Starting and maximal working precision for sign decisions.
pub const DEFAULT_PRECISION: u32 = 128;
pub const MAX_PRECISION: u32 = 4096;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    terms: BTreeMap<u128, BigRational>,
}

/// Splits `n = outer²·inner` with `inner` squarefree.
///
/// Complete for `n < 2^66`: after trial division up to 2^22 the cofactor
/// has at most two prime factors, so it is squarefree unless it is a square.
pub fn squarefree_split(n: u128) -> (u128, u128) {
    if n == 0 {
        return (0, 0);
    }
    let mut rest = n;
    let mut outer: u128 = 1;
    let mut inner: u128 = 1;
    let mut p: u128 = 2;
    while p * p <= rest && p < (1 << 22) {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        outer *= p.pow(e / 2);
        if e % 2 == 1 {
            inner *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = rest.sqrt();
    if r * r == rest {
        outer *= r;
    } else {
        inner *= rest;
    }
    (outer, inner)
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = Surd::zero();
        if !r.is_zero() {
            s.terms.insert(1, r);
        }
        s
    }

    pub fn from_int(n: i64) -> Self {
        Surd::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `coef·√c` reduced to squarefree form.
    pub fn sqrt_term(coef: BigRational, c: u128) -> Self {
        let (outer, inner) = squarefree_split(c);
        let mut s = Surd::zero();
        if coef.is_zero() || outer == 0 {
            return s;
        }
        s.terms.insert(inner, coef * BigRational::from_integer(BigInt::from(outer)));
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn radicands(&self) -> impl Iterator<Item = u128> + '_ {
        self.terms.keys().copied().filter(|&s| s != 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &BigRational)> + '_ {
        self.terms.iter().map(|(s, r)| (*s, r))
    }

    fn insert_add(&mut self, s: u128, r: BigRational) {
        let e = self.terms.entry(s).or_insert_with(BigRational::zero);
        *e += r;
        if e.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn add(&self, o: &Surd) -> Surd {
        let mut out = self.clone();
        for (s, r) in &o.terms {
            out.insert_add(*s, r.clone());
        }
        out
    }

    pub fn neg(&self) -> Surd {
        Surd { terms: self.terms.iter().map(|(s, r)| (*s, -r)).collect() }
    }

    pub fn sub(&self, o: &Surd) -> Surd {
        self.add(&o.neg())
    }

    pub fn add_rational(&self, r: &BigRational) -> Surd {
        let mut out = self.clone();
        out.insert_add(1, r.clone());
        out
    }

    pub fn scale(&self, r: &BigRational) -> Surd {
        if r.is_zero() {
            return Surd::zero();
        }
        Surd { terms: self.terms.iter().map(|(s, c)| (*s, c * r)).collect() }
    }

    pub fn scale_int(&self, n: &BigInt) -> Surd {
        self.scale(&BigRational::from_integer(n.clone()))
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (s, a) in &self.terms {
            for (t, b) in &o.terms {
                // √s·√t = g·√((s/g)(t/g)) for squarefree s, t
                let g = s.gcd(t);
                let rad = (s / g) * (t / g);
                out.insert_add(rad, a * b * BigRational::from_integer(BigInt::from(g)));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Surd {
        let mut base = self.clone();
        let mut acc = Surd::from_int(1);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Enclosure with roughly `prec` significant bits per term.
    pub fn enclose(&self, prec: u32) -> Ball {
        let mut acc = Ball::from_i64(0, prec);
        for (s, r) in &self.terms {
            let c = Ball::from_rational(r, prec);
            let term = if *s == 1 { c } else { c.mul(&Ball::sqrt_int(&BigInt::from(*s), prec)) };
            acc = acc.add(&term);
        }
        acc
    }

    /// Exact sign. Refines up to [`MAX_PRECISION`] bits; beyond that the
    /// value is so close to zero that the caller gets `PrecisionExhausted`.
    pub fn signum(&self) -> Result<Ordering> {
        if self.is_zero() {
            return Ok(Ordering::Equal);
        }
        if let Some(r) = self.as_rational() {
            return Ok(if r.is_positive() { Ordering::Greater } else { Ordering::Less });
        }
        // all coefficients with the same sign decide immediately
        if self.terms.values().all(|r| r.is_positive()) {
            return Ok(Ordering::Greater);
        }
        if self.terms.values().all(|r| r.is_negative()) {
            return Ok(Ordering::Less);
        }
        let mut prec = DEFAULT_PRECISION;
        loop {
            let b = self.enclose(prec);
            if b.is_positive() {
                return Ok(Ordering::Greater);
            }
            if b.is_negative() {
                return Ok(Ordering::Less);
            }
            if prec >= MAX_PRECISION {
                return Err(Error::PrecisionExhausted {
                    context: format!("sign of {self}"),
                    bits: prec,
                });
            }
            prec = (prec * 2).min(MAX_PRECISION);
        }
    }

    pub fn cmp_exact(&self, o: &Surd) -> Result<Ordering> {
        self.sub(o).signum()
    }

    pub fn floor(&self) -> Result<BigInt> {
        if let Some(r) = self.as_rational() {
            return Ok(r.floor().to_integer());
        }
        let mut prec = 64;
        loop {
            let b = self.enclose(prec);
            let lo = b.lower().floor().to_integer();
            let hi = b.upper().floor().to_integer();
            if lo == hi {
                return Ok(lo);
            }
            if &lo + 1 == hi {
                // the enclosure straddles one integer; decide exactly
                let d = self.add_rational(&BigRational::from_integer(-hi.clone()));
                return Ok(match d.signum()? {
                    Ordering::Less => lo,
                    _ => hi,
                });
            }
            if prec >= MAX_PRECISION {
                return Err(Error::PrecisionExhausted { context: format!("floor of {self}"), bits: prec });
            }
            prec *= 2;
        }
    }

    pub fn abs(&self) -> Result<Surd> {
        Ok(if self.signum()? == Ordering::Less { self.neg() } else { self.clone() })
    }

    /// Distance to the nearest integer, `min_m |self − m|`.
    pub fn nearest_int_dist(&self) -> Result<Surd> {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let m = self.add_rational(&half).floor()?;
        self.add_rational(&BigRational::from_integer(-m)).abs()
    }

    /// Fractional part `self − ⌊self⌋ ∈ [0, 1)`.
    pub fn frac(&self) -> Result<Surd> {
        let m = self.floor()?;
        Ok(self.add_rational(&BigRational::from_integer(-m)))
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(80).f64_bounds();
        0.5 * (lo + hi)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, r) in &self.terms {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            if *s == 1 {
                write!(f, "{r}")?;
            } else {
                write!(f, "{r}*sqrt({s})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn squarefree_split_examples() {
        assert_eq!(squarefree_split(8), (2, 2));
        assert_eq!(squarefree_split(12), (2, 3));
        assert_eq!(squarefree_split(49), (7, 1));
        assert_eq!(squarefree_split(30), (1, 30));
        assert_eq!(squarefree_split(1), (1, 1));
        let big_prime: u128 = 1_000_000_007;
        assert_eq!(squarefree_split(big_prime * big_prime * 3), (big_prime, 3));
    }

    #[test]
    fn perfect_square_radicand_collapses() {
        let s = Surd::sqrt_term(q(1, 1), 9);
        assert_eq!(s.as_rational(), Some(q(3, 1)));
    }

    #[test]
    fn sqrt2_times_sqrt6() {
        let a = Surd::sqrt_term(q(1, 1), 2);
        let b = Surd::sqrt_term(q(1, 1), 6);
        let p = a.mul(&b);
        assert_eq!(p, Surd::sqrt_term(q(2, 1), 3));
    }

    #[test]
    fn golden_ratio_identity() {
        // g = (√5 − 1)/2 satisfies g² + g − 1 = 0
        let g = Surd::sqrt_term(q(1, 2), 5).add_rational(&q(-1, 2));
        let z = g.mul(&g).add(&g).add_rational(&q(-1, 1));
        assert!(z.is_zero());
    }

    #[test]
    fn signs_of_near_cancellation() {
        // 99/70 − √2 ≈ 7.2e-5 > 0 ; 140/99 − √2 < 0
        let r2 = Surd::sqrt_term(q(1, 1), 2);
        assert_eq!(Surd::from_rational(q(99, 70)).sub(&r2).signum().unwrap(), Ordering::Greater);
        assert_eq!(Surd::from_rational(q(140, 99)).sub(&r2).signum().unwrap(), Ordering::Less);
    }

    #[test]
    fn floor_and_distance() {
        let five_r2 = Surd::sqrt_term(q(5, 1), 2);
        assert_eq!(five_r2.floor().unwrap(), BigInt::from(7));
        let d = five_r2.nearest_int_dist().unwrap();
        assert!((d.to_f64() - 0.071_067_811_865_475_24).abs() < 1e-15);
        assert_eq!(Surd::from_rational(q(5, 2)).nearest_int_dist().unwrap().as_rational(), Some(q(1, 2)));
    }
}
