//! Fixed-point scanning kernel.
//!
//! Fractional parts are held as 128-bit fixed-point numbers together with a
//! rigorous error width, so `frac(q·x + γ)` for large ranges of `q` costs a
//! couple of integer multiplications. Whenever an enclosure cannot be
//! separated from the threshold, the exact [`Surd`] path decides.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::surd::Surd;
use super::threshold::{FixedThreshold, Threshold};
use super::RealVector;
use crate::error::{Error, Result};

pub const HALF: u128 = 1 << 127;

/// `frac(x) ∈ [frac, frac + e]·2^-128` with `e = 0` when exact, else 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedFrac {
    pub frac: u128,
    pub exact: bool,
}

impl FixedFrac {
    pub fn from_surd(x: &Surd) -> Result<Self> {
        let f = x.frac()?;
        let scaled = f.scale(&BigRational::from_integer(BigInt::one() << 128u32));
        let fl = scaled.floor()?;
        let exact = scaled.as_rational().is_some_and(|r| r.is_integer());
        let frac = fl
            .to_u128()
            .ok_or_else(|| Error::InvalidInput("fractional part out of fixed-point range".into()))?;
        Ok(FixedFrac { frac, exact })
    }

    fn err(&self) -> u128 {
        if self.exact {
            0
        } else {
            1
        }
    }

    /// Enclosure of `frac(n·x)` for a signed multiplier.
    pub fn times(&self, n: i64) -> FracEnc {
        let m = n.unsigned_abs() as u128;
        let lo = m.wrapping_mul(self.frac);
        let width = m * self.err();
        if n >= 0 {
            FracEnc { lo, width }
        } else {
            FracEnc { lo: lo.wrapping_add(width).wrapping_neg(), width }
        }
    }
}

/// `frac(value)·2^128 ∈ [lo, lo + width]` modulo `2^128`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FracEnc {
    pub lo: u128,
    pub width: u128,
}

/// `‖value‖·2^128 ∈ [lo, hi]`, both at most `2^127`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistEnc {
    pub lo: u128,
    pub hi: u128,
}

#[inline]
fn dist_point(f: u128) -> u128 {
    if f <= HALF {
        f
    } else {
        f.wrapping_neg()
    }
}

impl FracEnc {
    pub fn add(&self, o: &FracEnc) -> FracEnc {
        FracEnc { lo: self.lo.wrapping_add(o.lo), width: self.width + o.width }
    }

    pub fn add_frac(&self, g: &FixedFrac) -> FracEnc {
        FracEnc { lo: self.lo.wrapping_add(g.frac), width: self.width + g.err() }
    }

    pub fn dist(&self) -> DistEnc {
        let end = self.lo.wrapping_add(self.width);
        let wraps = end < self.lo;
        let contains_zero = wraps || self.lo == 0;
        let contains_half = if wraps { self.lo <= HALF || end >= HALF } else { self.lo <= HALF && end >= HALF };
        let (a, b) = (dist_point(self.lo), dist_point(end));
        DistEnc {
            lo: if contains_zero { 0 } else { a.min(b) },
            hi: if contains_half { HALF } else { a.max(b) },
        }
    }
}

impl DistEnc {
    pub fn max(&self, o: &DistEnc) -> DistEnc {
        DistEnc { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }

    /// Lower and upper bounds as doubles (rigorous after outward rounding).
    pub fn to_f64(&self) -> (f64, f64) {
        let s = 2f64.powi(-128);
        ((self.lo as f64).next_down().max(0.0) * s, (self.hi as f64).next_up() * s)
    }
}

/// Outcome of a fast comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// `d < t` decided on enclosures where possible.
#[inline]
pub fn fast_below(d: &DistEnc, t: &FixedThreshold) -> Tri {
    if t.always() {
        Tri::Yes
    } else if d.lo >= t.hi {
        Tri::No
    } else if d.hi < t.lo {
        Tri::Yes
    } else {
        Tri::Unknown
    }
}

/// A point `x ∈ ℝ^ℓ` (optionally shifted by `γ`) prepared for scanning `‖q·x + γ‖`.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    coords: Vec<Surd>,
    shift: Vec<Surd>,
    fixed: Vec<FixedFrac>,
    fixed_shift: Vec<FixedFrac>,
}

impl ScanPoint {
    pub fn new(x: &RealVector) -> Result<Self> {
        let coords: Vec<Surd> = x.iter().map(|c| c.value().clone()).collect();
        let fixed = coords.iter().map(FixedFrac::from_surd).collect::<Result<Vec<_>>>()?;
        let n = coords.len();
        Ok(ScanPoint {
            coords,
            shift: vec![Surd::zero(); n],
            fixed,
            fixed_shift: vec![FixedFrac { frac: 0, exact: true }; n],
        })
    }

    pub fn with_shift(x: &RealVector, gamma: &RealVector) -> Result<Self> {
        if x.dim() != gamma.dim() {
            return Err(Error::InvalidInput(format!(
                "shift has dimension {} but the point has dimension {}",
                gamma.dim(),
                x.dim()
            )));
        }
        let mut p = ScanPoint::new(x)?;
        p.shift = gamma.iter().map(|c| c.value().clone()).collect();
        p.fixed_shift = p.shift.iter().map(FixedFrac::from_surd).collect::<Result<Vec<_>>>()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_enc(&self, i: usize, q: i64) -> DistEnc {
        self.fixed[i].times(q).add_frac(&self.fixed_shift[i]).dist()
    }

    /// Enclosure of `‖q·x + γ‖` (sup norm).
    pub fn dist_enc(&self, q: i64) -> DistEnc {
        let mut d = DistEnc { lo: 0, hi: 0 };
        for i in 0..self.coords.len() {
            d = d.max(&self.coord_enc(i, q));
        }
        d
    }

    pub fn exact_coord(&self, i: usize, q: i64) -> Result<Surd> {
        self.coords[i].scale_int(&BigInt::from(q)).add(&self.shift[i]).nearest_int_dist()
    }

    /// Exact `‖q·x + γ‖`.
    pub fn exact_dist(&self, q: i64) -> Result<Surd> {
        let mut best = Surd::zero();
        for i in 0..self.coords.len() {
            let d = self.exact_coord(i, q)?;
            if d.cmp_exact(&best)? == std::cmp::Ordering::Greater {
                best = d;
            }
        }
        Ok(best)
    }

    /// Strict test `‖q·x + γ‖ < threshold`.
    pub fn below(&self, q: i64, thr: &Threshold, fx: &FixedThreshold) -> Result<bool> {
        if fx.always() {
            return Ok(true);
        }
        if fx.never() {
            return Ok(false);
        }
        let mut ambiguous = false;
        for i in 0..self.coords.len() {
            match fast_below(&self.coord_enc(i, q), fx) {
                Tri::No => return Ok(false),
                Tri::Unknown => ambiguous = true,
                Tri::Yes => {}
            }
        }
        if !ambiguous {
            return Ok(true);
        }
        for i in 0..self.coords.len() {
            if fast_below(&self.coord_enc(i, q), fx) == Tri::Unknown && !thr.exceeds(&self.exact_coord(i, q)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A linear form `n ↦ ⟨n, x⟩` prepared for scanning `‖⟨n, x⟩‖`.
#[derive(Clone, Debug)]
pub struct LinearForm {
    coords: Vec<Surd>,
    fixed: Vec<FixedFrac>,
}

impl LinearForm {
    pub fn new(x: &RealVector) -> Result<Self> {
        let coords: Vec<Surd> = x.iter().map(|c| c.value().clone()).collect();
        let fixed = coords.iter().map(FixedFrac::from_surd).collect::<Result<Vec<_>>>()?;
        Ok(LinearForm { coords, fixed })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn fixed(&self, i: usize) -> &FixedFrac {
        &self.fixed[i]
    }

    pub fn frac_enc(&self, n: &[i64]) -> FracEnc {
        let mut acc = FracEnc { lo: 0, width: 0 };
        for (f, &k) in self.fixed.iter().zip(n) {
            acc = acc.add(&f.times(k));
        }
        acc
    }

    pub fn exact(&self, n: &[i64]) -> Result<Surd> {
        let mut acc = Surd::zero();
        for (c, &k) in self.coords.iter().zip(n) {
            acc = acc.add(&c.scale_int(&BigInt::from(k)));
        }
        acc.nearest_int_dist()
    }

    /// Exact value of `⟨n, x⟩ + p` (not reduced).
    pub fn exact_affine(&self, n: &[i64], p: i64) -> Surd {
        let mut acc = Surd::from_int(p);
        for (c, &k) in self.coords.iter().zip(n) {
            acc = acc.add(&c.scale_int(&BigInt::from(k)));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::RealVector;

    #[test]
    fn dist_enclosure_near_zero_and_half() {
        let z = FracEnc { lo: u128::MAX - 1, width: 3 };
        let d = z.dist();
        assert_eq!(d.lo, 0);
        assert_eq!(d.hi, 2);
        let h = FracEnc { lo: HALF - 1, width: 2 };
        let d = h.dist();
        assert_eq!(d.hi, HALF);
        assert_eq!(d.lo, HALF - 1);
    }

    #[test]
    fn fast_and_exact_agree_on_quadratic_scan() {
        let x: RealVector = "sqrt2m1,golden".parse().unwrap();
        let p = ScanPoint::new(&x).unwrap();
        for q in [1i64, 2, 5, 12, 29, 70, 169, 985, 5741, 1_000_003] {
            let exact = p.exact_dist(q).unwrap().to_f64() * 2f64.powi(128);
            let enc = p.dist_enc(q);
            assert!((enc.lo as f64) <= exact * (1.0 + 1e-12) && exact * (1.0 - 1e-12) <= enc.hi as f64);
        }
    }

    #[test]
    fn negative_multiplier_mirrors() {
        let x: RealVector = "sqrt2m1".parse().unwrap();
        let p = ScanPoint::new(&x).unwrap();
        for q in [3i64, 17, 1000] {
            let a = p.dist_enc(q);
            let b = p.dist_enc(-q);
            assert!(a.lo <= b.hi && b.lo <= a.hi);
        }
    }
}
