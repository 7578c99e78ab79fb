//! Exact real inputs and the nearest-integer distance `‖·‖`.
//!
//! Every coordinate accepted by the toolkit is rational or lies in a real
//! quadratic field, so distances are computed exactly as [`Surd`]s and
//! reported as [`CertifiedValue`] enclosures.

pub mod ball;
pub mod certified;
pub mod fast;
pub mod kernel;
pub mod surd;
pub mod threshold;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

pub use certified::CertifiedValue;
pub use surd::Surd;
pub use threshold::{Monomial, Threshold};

use crate::error::{Error, Result};

/// Named constants of the literal grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedConstant {
    /// `√2 − 1`
    Sqrt2Minus1,
    /// `(√5 − 1)/2`
    Golden,
    /// `Σ_{j≤n} 10^(−j!)`
    Liouville10(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealKind {
    Rational(BigRational),
    /// `a + b·√c`
    Quadratic { a: BigRational, b: BigRational, c: u64 },
    /// A decimal literal, taken at its exact rational value.
    Decimal(String),
    Named(NamedConstant),
}

/// A real number with an exact value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealExpr {
    kind: RealKind,
    value: Surd,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

impl RealExpr {
    pub fn rational(r: BigRational) -> Self {
        RealExpr { value: Surd::from_rational(r.clone()), kind: RealKind::Rational(r) }
    }

    pub fn integer(n: i64) -> Self {
        RealExpr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(RealExpr::rational(q(p, d)))
    }

    /// `a + b·√c`; `c` must be nonnegative. Perfect squares collapse to rationals.
    pub fn quadratic(a: BigRational, b: BigRational, c: u64) -> Self {
        let value = Surd::from_rational(a.clone()).add(&Surd::sqrt_term(b.clone(), c as u128));
        if b.is_zero() || value.is_rational() {
            let r = value.as_rational().unwrap();
            return RealExpr { kind: RealKind::Rational(r), value };
        }
        RealExpr { kind: RealKind::Quadratic { a, b, c }, value }
    }

    pub fn named(c: NamedConstant) -> Result<Self> {
        let value = match c {
            NamedConstant::Sqrt2Minus1 => Surd::sqrt_term(BigRational::one(), 2).add_rational(&q(-1, 1)),
            NamedConstant::Golden => Surd::sqrt_term(q(1, 2), 5).add_rational(&q(-1, 2)),
            NamedConstant::Liouville10(n) => {
                if n == 0 || n > 8 {
                    return Err(Error::Parse(format!("liouville10({n}) requires 1 ≤ n ≤ 8")));
                }
                let mut s = BigRational::zero();
                for j in 1..=n {
                    let e = factorial(j) as u32;
                    s += BigRational::new(BigInt::one(), Pow::pow(BigInt::from(10), e));
                }
                Surd::from_rational(s)
            }
        };
        Ok(RealExpr { kind: RealKind::Named(c), value })
    }

    pub fn kind(&self) -> &RealKind {
        &self.kind
    }

    pub fn value(&self) -> &Surd {
        &self.value
    }

    pub fn is_rational(&self) -> bool {
        self.value.is_rational()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RealKind::Rational(r) => write!(f, "{r}"),
            RealKind::Quadratic { a, b, c } => write!(f, "{a}+{b}*sqrt({c})"),
            RealKind::Decimal(s) => write!(f, "{s}"),
            RealKind::Named(NamedConstant::Sqrt2Minus1) => write!(f, "sqrt2m1"),
            RealKind::Named(NamedConstant::Golden) => write!(f, "golden"),
            RealKind::Named(NamedConstant::Liouville10(n)) => write!(f, "liouville10({n})"),
        }
    }
}

/// Parses a decimal or `p/q` rational literal.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("'{s}' is not a decimal number"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(err());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits: BigInt = format!("{ip}{fp}0").trim_start_matches('0').parse().unwrap_or_else(|_| BigInt::zero());
    // the appended zero is undone by the extra power of ten
    let scale = fp.len() as i32 + 1 - exp;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::new(digits, Pow::pow(&ten, scale as u32))
    } else {
        BigRational::from_integer(digits * Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn is_decimal_literal(s: &str) -> bool {
    let s = s.trim();
    !s.contains('/') && parse_decimal(s).is_ok()
}

/// Parses one summand of a quadratic literal: a number, `sqrt(c)` or `b*sqrt(c)`.
fn parse_term(t: &str) -> Result<(BigRational, Option<(BigRational, u64)>)> {
    let t = t.trim();
    if let Some(pos) = t.find("sqrt(") {
        let close = t[pos..].find(')').ok_or_else(|| Error::Parse(format!("unclosed sqrt in '{t}'")))? + pos;
        let rad: u64 = t[pos + 5..close]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("radicand in '{t}' must be a nonnegative integer")))?;
        if !t[close + 1..].trim().is_empty() {
            return Err(Error::Parse(format!("trailing text after sqrt in '{t}'")));
        }
        let coef_part = t[..pos].trim();
        let coef = match coef_part {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            c => {
                let c = c.strip_suffix('*').ok_or_else(|| Error::Parse(format!("expected '*' before sqrt in '{t}'")))?;
                match c.trim() {
                    "-" => -BigRational::one(),
                    "+" | "" => BigRational::one(),
                    c => parse_rational(c)?,
                }
            }
        };
        return Ok((BigRational::zero(), Some((coef, rad))));
    }
    Ok((parse_rational(t)?, None))
}

impl FromStr for RealExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sqrt2m1" => return RealExpr::named(NamedConstant::Sqrt2Minus1),
            "golden" => return RealExpr::named(NamedConstant::Golden),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("liouville10(").and_then(|r| r.strip_suffix(')')) {
            let n: u32 = inner.trim().parse().map_err(|_| Error::Parse(format!("bad liouville10 argument '{inner}'")))?;
            return RealExpr::named(NamedConstant::Liouville10(n));
        }
        if is_decimal_literal(s) && s.contains(['.', 'e', 'E']) {
            let r = parse_decimal(s)?;
            return Ok(RealExpr { value: Surd::from_rational(r), kind: RealKind::Decimal(s.to_string()) });
        }
        if !s.contains("sqrt") {
            return Ok(RealExpr::rational(parse_rational(s)?));
        }
        // split into signed summands at top-level '+' / '-' (not inside parentheses or exponents)
        let mut terms = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        let bytes = s.as_bytes();
        for (i, &ch) in bytes.iter().enumerate() {
            match ch {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > start => {
                    let prev = bytes[i - 1];
                    if prev != b'*' && prev != b'e' && prev != b'E' && prev != b'/' {
                        terms.push(&s[start..i]);
                        start = i;
                    }
                }
                _ => {}
            }
        }
        terms.push(&s[start..]);
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        let mut c: Option<u64> = None;
        for t in terms {
            let (r, rad) = parse_term(t)?;
            a += r;
            if let Some((coef, rc)) = rad {
                match c {
                    Some(existing) if existing != rc => {
                        return Err(Error::Parse(format!("'{s}' mixes radicands {existing} and {rc}")));
                    }
                    _ => c = Some(rc),
                }
                b += coef;
            }
        }
        Ok(RealExpr::quadratic(a, b, c.unwrap_or(0)))
    }
}

/// A point of `ℝ^ℓ`, `ℓ ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealVector {
    coords: Vec<RealExpr>,
}

impl RealVector {
    pub fn new(coords: Vec<RealExpr>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("a vector needs at least one coordinate".into()));
        }
        Ok(RealVector { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        RealVector { coords: vec![RealExpr::integer(0); dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RealExpr> {
        self.coords.iter()
    }

    pub fn coord(&self, i: usize) -> &RealExpr {
        &self.coords[i]
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().all(RealExpr::is_rational)
    }

    /// `(x, y)`: this point extended by further coordinates.
    pub fn extend(&self, more: &RealVector) -> RealVector {
        let mut coords = self.coords.clone();
        coords.extend(more.coords.iter().cloned());
        RealVector { coords }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(RealExpr::to_f64).collect()
    }
}

impl fmt::Display for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for RealVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        let coords = parts.into_iter().map(str::parse).collect::<Result<Vec<RealExpr>>>()?;
        RealVector::new(coords)
    }
}

impl From<Vec<RealExpr>> for RealVector {
    fn from(coords: Vec<RealExpr>) -> Self {
        RealVector::new(coords).expect("nonempty coordinate list")
    }
}

/// Certified `‖t‖ = min_m |t − m| ∈ [0, 1/2]`.
pub fn nearest_int_dist(t: &RealExpr, precision_bits: u32) -> Result<CertifiedValue> {
    CertifiedValue::from_surd(&t.value().nearest_int_dist()?, precision_bits)
}

/// Exact `‖q·x‖ = max_i ‖q·x_i‖`.
pub fn sup_norm_dist_surd(x: &RealVector, q: u64) -> Result<Surd> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let n = BigInt::from(q);
    let mut best = Surd::zero();
    for c in x.iter() {
        let d = c.value().scale_int(&n).nearest_int_dist()?;
        if d.cmp_exact(&best)? == std::cmp::Ordering::Greater {
            best = d;
        }
    }
    Ok(best)
}

/// Certified `‖q·x‖ = max_i ‖q·x_i‖`.
pub fn sup_norm_dist(x: &RealVector, q: u64, precision_bits: u32) -> Result<CertifiedValue> {
    CertifiedValue::from_surd(&sup_norm_dist_surd(x, q)?, precision_bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> RealExpr {
        s.parse().unwrap()
    }

    #[test]
    fn literal_grammar() {
        assert_eq!(expr("3/6").value().as_rational(), Some(q(1, 2)));
        assert_eq!(expr("0.3").value().as_rational(), Some(q(3, 10)));
        assert_eq!(expr("-1.25e-1").value().as_rational(), Some(q(-1, 8)));
        assert_eq!(expr("7").value().as_rational(), Some(q(7, 1)));
        let g = expr("golden");
        let g2 = expr("-1/2+1/2*sqrt(5)");
        assert_eq!(g.value(), g2.value());
        assert_eq!(expr("sqrt(8)").value(), &Surd::sqrt_term(q(2, 1), 2));
        assert_eq!(expr("1-sqrt(2)").value(), &Surd::sqrt_term(q(-1, 1), 2).add_rational(&q(1, 1)));
        assert_eq!(expr("sqrt(9)").value().as_rational(), Some(q(3, 1)));
        assert!("1+sqrt(2)+sqrt(3)".parse::<RealExpr>().is_err());
        assert!("abc".parse::<RealExpr>().is_err());
        assert!("1/0".parse::<RealExpr>().is_err());
    }

    #[test]
    fn liouville_is_rational() {
        let l = expr("liouville10(3)");
        assert_eq!(l.value().as_rational(), Some(q(110_001, 1_000_000)));
    }

    #[test]
    fn vector_parsing_respects_parentheses() {
        let v: RealVector = "liouville10(2), 1/2, sqrt(3)-1".parse().unwrap();
        assert_eq!(v.dim(), 3);
        assert_eq!(v.to_string(), "liouville10(2),1/2,-1+1*sqrt(3)");
    }

    #[test]
    fn nearest_int_dist_examples() {
        assert_eq!(nearest_int_dist(&expr("5/2"), 128).unwrap().exact_value(), Some(&q(1, 2)));
        assert_eq!(nearest_int_dist(&expr("3"), 128).unwrap().exact_value(), Some(&q(0, 1)));
        let c = nearest_int_dist(&expr("5*sqrt(2)"), 60).unwrap();
        // 5√2 − 7 = 0.0710678118654752440084436...
        assert!(c.width() <= q(1, 1 << 60));
        assert!((c.midpoint_f64() - 0.071_067_811_865_475_24).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_examples() {
        let z: RealVector = "0,0".parse().unwrap();
        assert!(sup_norm_dist(&z, 7, 128).unwrap().is_zero());
        let h: RealVector = "1/2".parse().unwrap();
        assert_eq!(sup_norm_dist(&h, 3, 128).unwrap().exact_value(), Some(&q(1, 2)));
        let p: RealVector = "sqrt2m1,sqrt(3)-1".parse().unwrap();
        let c = sup_norm_dist(&p, 3, 128).unwrap();
        // max(‖3√2−3‖, ‖3√3−3‖) = 0.242640687119285146...
        assert!((c.midpoint_f64() - 0.242_640_687_119_285_15).abs() < 1e-15);
    }
}
