use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::ball::Ball;
use super::surd::{Surd, MAX_PRECISION};
use crate::error::{Error, Result};

/// A certified enclosure `[lower, upper]` of a real number.
///
/// Endpoints are dyadic unless the value is an exact rational, in which
/// case the enclosure degenerates to that point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    lower: BigRational,
    upper: BigRational,
    precision_bits: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

impl CertifiedValue {
    pub fn exact(r: BigRational, precision_bits: u32) -> Self {
        CertifiedValue { lower: r.clone(), upper: r, precision_bits }
    }

    /// Grid-aligned enclosure `[⌊v·2^b⌋, ⌊v·2^b⌋ + 1]·2^-b`, nested as `b` grows.
    pub fn from_surd(v: &Surd, precision_bits: u32) -> Result<Self> {
        if let Some(r) = v.as_rational() {
            return Ok(CertifiedValue::exact(r, precision_bits));
        }
        let scale = BigRational::from_integer(pow2(precision_bits));
        let f = v.scale(&scale).floor()?;
        let lower = BigRational::new(f.clone(), pow2(precision_bits));
        let upper = BigRational::new(f + 1, pow2(precision_bits));
        Ok(CertifiedValue { lower, upper, precision_bits })
    }

    /// Refines `ball_at(prec)` until it fits inside one grid cell of width `2^-bits`,
    /// or inside two adjacent cells once the ball is narrower than a cell (a value
    /// sitting on a grid point never fits in one).
    pub fn from_balls(
        mut ball_at: impl FnMut(u32) -> Result<Ball>,
        precision_bits: u32,
        context: &str,
    ) -> Result<Self> {
        let scale = BigRational::from_integer(pow2(precision_bits));
        let mut prec = precision_bits.max(64) + 32;
        loop {
            let b = ball_at(prec)?;
            let lo = (b.lower() * &scale).floor().to_integer();
            let hi_r = b.upper() * &scale;
            let hi = hi_r.floor().to_integer();
            if lo == hi || (hi == &lo + 1 && hi_r.is_integer()) {
                return Ok(CertifiedValue {
                    lower: BigRational::new(lo.clone(), pow2(precision_bits)),
                    upper: BigRational::new(lo + 1, pow2(precision_bits)),
                    precision_bits,
                });
            }
            if hi == &lo + 1 && b.upper() - b.lower() < BigRational::new(BigInt::one(), pow2(precision_bits + 8)) {
                return Ok(CertifiedValue {
                    lower: BigRational::new(lo.clone(), pow2(precision_bits)),
                    upper: BigRational::new(lo + 2, pow2(precision_bits)),
                    precision_bits,
                });
            }
            if prec >= MAX_PRECISION {
                return Err(Error::PrecisionExhausted { context: context.to_string(), bits: prec });
            }
            prec = (prec * 2).min(MAX_PRECISION);
        }
    }

    pub fn lower(&self) -> &BigRational {
        &self.lower
    }

    pub fn upper(&self) -> &BigRational {
        &self.upper
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.is_exact().then_some(&self.lower)
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower <= r && r <= &self.upper
    }

    pub fn is_zero(&self) -> bool {
        self.is_exact() && self.lower.is_zero()
    }

    pub fn midpoint_f64(&self) -> f64 {
        let m = (&self.lower + &self.upper) / BigRational::from_integer(BigInt::from(2));
        super::fast::FInterval::from_rational(&m).lo
    }
}

impl fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lower)
        } else {
            write!(f, "[{},{}]", self.lower, self.upper)
        }
    }
}

impl Serialize for CertifiedValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_as_precision_grows() {
        let v = Surd::sqrt_term(BigRational::one(), 2);
        let mut prev: Option<CertifiedValue> = None;
        for bits in [8, 16, 17, 64, 128] {
            let c = CertifiedValue::from_surd(&v, bits).unwrap();
            assert!(c.width() <= BigRational::new(BigInt::one(), pow2(bits)));
            if let Some(p) = prev {
                assert!(p.lower() <= c.lower() && c.upper() <= p.upper());
            }
            prev = Some(c);
        }
    }

    #[test]
    fn rational_is_a_point() {
        let r = BigRational::new(1.into(), 3.into());
        let c = CertifiedValue::from_surd(&Surd::from_rational(r.clone()), 128).unwrap();
        assert_eq!(c.exact_value(), Some(&r));
        assert_eq!(c.to_string(), "1/3");
    }
}
