//! Approximating functions `ψ: ℕ → [0, ∞)`.
//!
//! Every preset evaluates to a [`Threshold`], so comparisons `‖qx‖ < ψ(q)`
//! are decided exactly. Besides evaluation this module classifies the
//! divergence of `Σ ψ(q)^d` through condensation and checks u-regularity of
//! `Ψ(q) = ψ(q)/q`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::fast::{FInterval, LN2_LO};
use crate::real::{parse_rational, sup_norm_dist_surd, CertifiedValue, Monomial, RealVector, Threshold};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxKind {
    /// `q^(-a)`
    Power(BigRational),
    /// `q^(-a)·(ln q)^(-b)`, defined for `q ≥ 2`
    PowerLog(BigRational, BigRational),
    Constant(BigRational),
    /// `(q·(ln q)²)^(-1/d)`, with `φ(1) = φ(2)`
    Phi(u32),
    Max(Box<ApproxFunction>, Box<ApproxFunction>),
    /// Step function: the value at the largest tabulated `q' ≤ q`, the first
    /// value before the table and `0` after its last entry.
    Table { source: String, rows: Vec<(u64, BigRational)> },
}

/// A nonnegative, nonincreasing approximating function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxFunction {
    kind: ApproxKind,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl ApproxFunction {
    pub fn power(a: BigRational) -> Result<Self> {
        if !a.is_positive() {
            return Err(Error::InvalidInput(format!("power exponent must be positive, got {a} (use const: for constants)")));
        }
        Ok(ApproxFunction { kind: ApproxKind::Power(a) })
    }

    pub fn power_log(a: BigRational, b: BigRational) -> Result<Self> {
        if a.is_negative() || (a.is_zero() && b.is_negative()) {
            return Err(Error::InvalidInput(format!("q^-{a}*log^-{b} is not nonincreasing")));
        }
        if b.is_negative() {
            // d/dq of -a ln q - b ln ln q is ≤ 0 on [2, ∞) iff a·ln 2 + b ≥ 0
            let lhs = FInterval::from_rational(&a).mul(&FInterval::point(LN2_LO)).add(&FInterval::from_rational(&b));
            if lhs.lo < 0.0 {
                return Err(Error::InvalidInput(format!("q^-{a}*log^-{b} is not nonincreasing from q = 2")));
            }
        }
        Ok(ApproxFunction { kind: ApproxKind::PowerLog(a, b) })
    }

    pub fn constant(c: BigRational) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::InvalidInput(format!("constant must be nonnegative, got {c}")));
        }
        Ok(ApproxFunction { kind: ApproxKind::Constant(c) })
    }

    pub fn phi(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("phi needs d ≥ 1".into()));
        }
        Ok(ApproxFunction { kind: ApproxKind::Phi(d) })
    }

    pub fn max(f: ApproxFunction, g: ApproxFunction) -> Self {
        ApproxFunction { kind: ApproxKind::Max(Box::new(f), Box::new(g)) }
    }

    /// A table, rejected unless it is nonnegative and nonincreasing in `q`.
    pub fn table(source: impl Into<String>, rows: Vec<(u64, BigRational)>) -> Result<Self> {
        let f = ApproxFunction::table_unchecked(source, rows)?;
        if let ApproxKind::Table { rows, .. } = &f.kind {
            if rows.iter().any(|(_, v)| v.is_negative()) {
                return Err(Error::InvalidInput("table values must be nonnegative".into()));
            }
            if let Some(w) = rows.windows(2).find(|w| w[1].1 > w[0].1) {
                return Err(Error::InvalidInput(format!(
                    "table increases from q = {} to q = {}; ψ must be nonincreasing",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(f)
    }

    /// A table without the monotonicity check, for probing the regularity
    /// classifier on functions outside the contract.
    pub fn table_unchecked(source: impl Into<String>, mut rows: Vec<(u64, BigRational)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("table is empty".into()));
        }
        rows.sort_by_key(|r| r.0);
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput("table lists a q twice".into()));
        }
        if rows[0].0 == 0 {
            return Err(Error::InvalidInput("table q values start at 1".into()));
        }
        Ok(ApproxFunction { kind: ApproxKind::Table { source: source.into(), rows } })
    }

    /// Reads a two-column `q,value` CSV file; a non-numeric first row is a header.
    pub fn table_from_file(path: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{path}: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("{path}: row {} must have two columns q,value", i + 1)));
            }
            let q = rec[0].parse::<u64>();
            let v = parse_rational(&rec[1]);
            match (q, v) {
                (Ok(q), Ok(v)) => rows.push((q, v)),
                _ if i == 0 => continue,
                _ => return Err(Error::Parse(format!("{path}: row {} is not 'q,value'", i + 1))),
            }
        }
        ApproxFunction::table(path, rows)
    }

    pub fn kind(&self) -> &ApproxKind {
        &self.kind
    }

    /// False only for tables built with [`ApproxFunction::table_unchecked`] that increase somewhere.
    pub fn is_nonincreasing(&self) -> bool {
        match &self.kind {
            ApproxKind::Table { rows, .. } => rows.windows(2).all(|w| w[1].1 <= w[0].1),
            ApproxKind::Max(f, g) => f.is_nonincreasing() && g.is_nonincreasing(),
            _ => true,
        }
    }

    /// True when the preset involves `ln q` and is undefined at `q = 1`.
    pub fn needs_log(&self) -> bool {
        match &self.kind {
            ApproxKind::PowerLog(_, b) => !b.is_zero(),
            ApproxKind::Max(f, g) => f.needs_log() || g.needs_log(),
            _ => false,
        }
    }

    /// `ψ(q)` as an exact threshold.
    pub fn threshold_at(&self, q: u64) -> Result<Threshold> {
        self.threshold_at_big(&BigInt::from(q))
    }

    pub fn threshold_at_big(&self, q: &BigInt) -> Result<Threshold> {
        if !q.is_positive() {
            return Err(Error::Domain("ψ is defined for q ≥ 1".into()));
        }
        Ok(match &self.kind {
            ApproxKind::Power(a) => Threshold::power(q.clone(), -a),
            ApproxKind::PowerLog(a, b) => {
                if b.is_zero() {
                    Threshold::power(q.clone(), -a)
                } else if q.is_one() {
                    return Err(Error::Domain("log kinds are undefined at q = 1".into()));
                } else {
                    Threshold::monomial(Monomial { coef: BigRational::one(), base: q.clone(), pow: -a, log_pow: -b })
                }
            }
            ApproxKind::Constant(c) => Threshold::rational(c.clone()),
            ApproxKind::Phi(d) => {
                let base = if q.is_one() { BigInt::from(2) } else { q.clone() };
                let d = *d as i64;
                Threshold::monomial(Monomial { coef: BigRational::one(), base, pow: rat(-1, d), log_pow: rat(-2, d) })
            }
            ApproxKind::Max(f, g) => f.threshold_at_big(q)?.max(g.threshold_at_big(q)?),
            ApproxKind::Table { rows, .. } => Threshold::rational(table_lookup(rows, q)),
        })
    }

    /// Certified `ψ(q)`.
    pub fn eval(&self, q: u64, precision_bits: u32) -> Result<CertifiedValue> {
        self.threshold_at(q)?.certified(precision_bits)
    }
}

fn table_lookup(rows: &[(u64, BigRational)], q: &BigInt) -> BigRational {
    let last = rows.last().expect("nonempty table");
    if q > &BigInt::from(last.0) {
        return BigRational::zero();
    }
    let q = q.to_u64().expect("within table range");
    match rows.binary_search_by_key(&q, |r| r.0) {
        Ok(i) => rows[i].1.clone(),
        Err(0) => rows[0].1.clone(),
        Err(i) => rows[i - 1].1.clone(),
    }
}

impl fmt::Display for ApproxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ApproxKind::Power(a) => write!(f, "q^-{a}"),
            ApproxKind::PowerLog(a, b) => write!(f, "q^-{a}*log^{}", -b),
            ApproxKind::Constant(c) => write!(f, "const:{c}"),
            ApproxKind::Phi(d) => write!(f, "phi:d={d}"),
            ApproxKind::Max(a, b) => write!(f, "max({a},{b})"),
            ApproxKind::Table { source, .. } => write!(f, "table:{source}"),
        }
    }
}

const GRAMMAR: &str = "expected one of q^-A, q^-A*log^-B, const:C, phi:d=D, max(F,G), table:PATH";

fn grammar_error(s: &str) -> Error {
    Error::Parse(format!("bad approximating function '{s}': {GRAMMAR}"))
}

fn parse_exponent(s: &str, prefix: &str, lit: &str) -> Result<BigRational> {
    let e = s.strip_prefix(prefix).ok_or_else(|| grammar_error(lit))?;
    let e = e.trim();
    let e = e.strip_prefix('(').and_then(|e| e.strip_suffix(')')).unwrap_or(e);
    parse_rational(e).map_err(|_| grammar_error(lit))
}

impl FromStr for ApproxFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lit = s.trim();
        if let Some(c) = lit.strip_prefix("const:") {
            return ApproxFunction::constant(parse_rational(c).map_err(|_| grammar_error(lit))?);
        }
        if let Some(d) = lit.strip_prefix("phi:") {
            let d = d.trim().strip_prefix("d=").ok_or_else(|| grammar_error(lit))?;
            return ApproxFunction::phi(d.trim().parse().map_err(|_| grammar_error(lit))?);
        }
        if let Some(p) = lit.strip_prefix("table:") {
            return ApproxFunction::table_from_file(p.trim());
        }
        if let Some(inner) = lit.strip_prefix("max(").and_then(|r| r.strip_suffix(')')) {
            let mut depth = 0;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => {
                        let f: ApproxFunction = inner[..i].parse()?;
                        let g: ApproxFunction = inner[i + 1..].parse()?;
                        return Ok(ApproxFunction::max(f, g));
                    }
                    _ => {}
                }
            }
            return Err(grammar_error(lit));
        }
        if lit.starts_with("q^") {
            let mut parts = lit.splitn(2, '*');
            let p = parts.next().unwrap().trim();
            let neg_a = parse_exponent(p, "q^", lit)?;
            return match parts.next() {
                None => ApproxFunction::power(-neg_a),
                Some(l) => {
                    let neg_b = parse_exponent(l.trim(), "log^", lit)?;
                    ApproxFunction::power_log(-neg_a, -neg_b)
                }
            };
        }
        Err(grammar_error(lit))
    }
}

/// `ψ_x(q)`: `ψ(q)` when `‖qx‖ < ψ(q)` and `0` otherwise.
pub fn psi_x(psi: &ApproxFunction, x: &RealVector, q: u64, precision_bits: u32) -> Result<CertifiedValue> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be at least 1".into()));
    }
    let t = psi.threshold_at(q)?;
    let d = sup_norm_dist_surd(x, q)?;
    if t.exceeds(&d)? {
        t.certified(precision_bits)
    } else {
        Ok(CertifiedValue::exact(BigRational::zero(), precision_bits))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Diverges,
    Converges,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Diverges => "diverges",
            Verdict::Converges => "converges",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Finite-data decision rule on condensation increments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceRule {
    /// Every one of the last `window` increments at least this large means divergence.
    pub floor: f64,
    pub window: usize,
    /// Every increment ratio over the last `window` steps at most this means convergence.
    pub ratio_max: f64,
}

impl Default for DivergenceRule {
    fn default() -> Self {
        DivergenceRule { floor: 1e-6, window: 5, ratio_max: 0.9 }
    }
}

impl DivergenceRule {
    /// Applies the rule to increments `a_1, …, a_M`.
    pub fn classify(&self, increments: &[f64]) -> Verdict {
        let w = self.window.max(1);
        if increments.len() < w + 1 {
            return Verdict::Inconclusive;
        }
        let tail = &increments[increments.len() - w - 1..];
        let ratios_ok = tail.windows(2).all(|p| {
            if p[0] == 0.0 {
                p[1] == 0.0
            } else {
                p[1] / p[0] <= self.ratio_max
            }
        });
        if ratios_ok {
            return Verdict::Converges;
        }
        if tail[1..].iter().all(|&a| a >= self.floor) {
            return Verdict::Diverges;
        }
        Verdict::Inconclusive
    }
}

/// A nonnegative partial sum, exact when every summand is rational.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSum {
    pub exact: Option<BigRational>,
    pub enclosure: FInterval,
}

impl SeriesSum {
    pub fn zero() -> Self {
        SeriesSum { exact: Some(BigRational::zero()), enclosure: FInterval::point(0.0) }
    }

    pub fn add_threshold(&self, t: &Threshold) -> SeriesSum {
        let exact = match (&self.exact, t.as_rational()) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let enclosure = match &exact {
            Some(r) => FInterval::from_rational(r),
            None => self.enclosure.add(&t.enclosure_f64()),
        };
        SeriesSum { exact, enclosure }
    }

    pub fn add(&self, o: &SeriesSum) -> SeriesSum {
        let exact = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        let enclosure = match &exact {
            Some(r) => FInterval::from_rational(r),
            None => self.enclosure.add(&o.enclosure),
        };
        SeriesSum { exact, enclosure }
    }

    /// `self + r`.
    pub fn shift(&self, r: &BigRational) -> SeriesSum {
        self.add(&SeriesSum { exact: Some(r.clone()), enclosure: FInterval::from_rational(r) })
    }

    /// `self − o`.
    pub fn sub(&self, o: &SeriesSum) -> SeriesSum {
        let neg = SeriesSum { exact: o.exact.as_ref().map(|r| -r), enclosure: o.enclosure.neg() };
        self.add(&neg)
    }

    /// `r·self` for `r > 0`.
    pub fn scale(&self, r: &BigRational) -> SeriesSum {
        let exact = self.exact.as_ref().map(|a| a * r);
        let enclosure = match &exact {
            Some(v) => FInterval::from_rational(v),
            None => self.enclosure.mul(&FInterval::from_rational(r)),
        };
        SeriesSum { exact, enclosure }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.enclosure.lo + self.enclosure.hi)
    }
}

impl fmt::Display for SeriesSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "[{:e},{:e}]", self.enclosure.lo, self.enclosure.hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceVerdict {
    /// Closed-form classification when available, else the finite-data rule.
    pub verdict: Verdict,
    /// What the finite-data rule alone concludes from the computed sums.
    pub data_verdict: Verdict,
    /// Classification from the closed form of the preset, if any.
    pub analytic: Option<Verdict>,
    /// `(M, Σ_{1≤m≤M} base^m ψ(base^m)^d)`.
    pub partial_sums: Vec<(u32, SeriesSum)>,
    /// Mean increment over the rule's window.
    pub growth_slope: f64,
}

/// Convergence of `Σ_q ψ(q)^d` read off the preset.
pub fn analytic_divergence(psi: &ApproxFunction, d: u32) -> Option<Verdict> {
    let dq = BigRational::from_integer(BigInt::from(d));
    let one = BigRational::one();
    let by_exponents = |a: &BigRational, b: &BigRational| {
        let ad = a * &dq;
        let bd = b * &dq;
        match ad.cmp(&one) {
            Ordering::Less => Verdict::Diverges,
            Ordering::Greater => Verdict::Converges,
            Ordering::Equal if bd <= one => Verdict::Diverges,
            Ordering::Equal => Verdict::Converges,
        }
    };
    Some(match psi.kind() {
        ApproxKind::Power(a) => by_exponents(a, &BigRational::zero()),
        ApproxKind::PowerLog(a, b) => by_exponents(a, b),
        ApproxKind::Phi(e) => by_exponents(&rat(1, *e as i64), &rat(2, *e as i64)),
        ApproxKind::Constant(c) => {
            if c.is_zero() {
                Verdict::Converges
            } else {
                Verdict::Diverges
            }
        }
        ApproxKind::Max(f, g) => match (analytic_divergence(f, d)?, analytic_divergence(g, d)?) {
            (Verdict::Diverges, _) | (_, Verdict::Diverges) => Verdict::Diverges,
            (Verdict::Converges, Verdict::Converges) => Verdict::Converges,
            _ => return None,
        },
        // finitely supported
        ApproxKind::Table { .. } => Verdict::Converges,
    })
}

/// The condensed term `base^m·ψ(base^m)^d` as an exact threshold.
pub fn condensed_term(psi: &ApproxFunction, d: u32, base: u64, m: u32) -> Result<Threshold> {
    let q = Pow::pow(BigInt::from(base), m);
    Ok(psi.threshold_at_big(&q)?.powi(d).scale(&BigRational::from_integer(q)))
}

/// Condensation test with base 2.
pub fn classify_divergence(psi: &ApproxFunction, d: u32, m_max: u32, rule: &DivergenceRule) -> Result<DivergenceVerdict> {
    classify_divergence_base(psi, d, 2, 1, m_max, rule)
}

/// Partial sums `Σ_{m_lo ≤ m ≤ M} base^m·ψ(base^m)^d` for `M ≤ m_max` and the resulting verdict.
pub fn classify_divergence_base(
    psi: &ApproxFunction,
    d: u32,
    base: u64,
    m_lo: u32,
    m_max: u32,
    rule: &DivergenceRule,
) -> Result<DivergenceVerdict> {
    if d == 0 || base < 2 {
        return Err(Error::InvalidInput("condensation needs d ≥ 1 and base ≥ 2".into()));
    }
    if m_max < m_lo {
        return Err(Error::InvalidInput(format!("empty condensation range {m_lo}..={m_max}")));
    }
    if (m_max as f64) * (base as f64).log2() > 1000.0 {
        return Err(Error::BudgetExceeded(format!("{base}^{m_max} exceeds the double range used for enclosures")));
    }
    let mut sums = Vec::new();
    let mut increments = Vec::new();
    let mut acc = SeriesSum::zero();
    for m in m_lo..=m_max {
        let term = condensed_term(psi, d, base, m)?;
        let prev = acc.midpoint();
        acc = acc.add_threshold(&term);
        increments.push(match term.as_rational() {
            Some(r) => r.to_f64().unwrap_or(f64::INFINITY),
            None => (acc.midpoint() - prev).max(0.0),
        });
        sums.push((m, acc.clone()));
    }
    let data_verdict = rule.classify(&increments);
    let w = rule.window.max(1).min(increments.len());
    let growth_slope = increments[increments.len() - w..].iter().sum::<f64>() / w as f64;
    let analytic = analytic_divergence(psi, d);
    Ok(DivergenceVerdict {
        verdict: analytic.unwrap_or(data_verdict),
        data_verdict,
        analytic,
        partial_sums: sums,
        growth_slope,
    })
}

/// Outcome of the u-regularity check of `Ψ(q) = ψ(q)/q` along `q = k^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityCheck {
    /// `Ψ(k^{j+1}) ≤ κ·Ψ(k^j)` with `κ = 1/k` for every tested `j`.
    pub holds: bool,
    pub kappa: BigRational,
    /// Largest observed ratio `Ψ(k^{j+1})/Ψ(k^j)` (upper enclosure).
    pub witnessed_kappa: f64,
    /// The same maximum, when every ratio is rational.
    pub witnessed_exact: Option<BigRational>,
    /// `(j, upper enclosure of the ratio)`; a zero `Ψ(k^j)` followed by zero counts as ratio 0.
    pub ratios: Vec<(u32, f64)>,
    /// First `j` where the inequality fails.
    pub first_failure: Option<u32>,
}

/// Checks `Ψ(k^{j+1}) ≤ Ψ(k^j)/k` for `j_lo ≤ j ≤ j_hi`, exactly.
pub fn check_u_regular(psi: &ApproxFunction, k: u64, j_lo: u32, j_hi: u32) -> Result<RegularityCheck> {
    if k < 2 {
        return Err(Error::InvalidInput("k must be at least 2".into()));
    }
    if j_hi < j_lo {
        return Err(Error::InvalidInput("empty j range".into()));
    }
    let kq = BigRational::from_integer(BigInt::from(k));
    let kb = BigInt::from(k);
    let mut ratios = Vec::new();
    let mut holds = true;
    let mut first_failure = None;
    let mut max_hi = 0f64;
    let mut max_exact: Option<BigRational> = Some(BigRational::zero());
    for j in j_lo..=j_hi {
        let a = psi.threshold_at_big(&Pow::pow(&kb, j))?;
        let b = psi.threshold_at_big(&Pow::pow(&kb, j + 1))?;
        let ok = if a == b { true } else { b.cmp(&a)? != Ordering::Greater };
        let (hi, exact) = match (a.as_rational(), b.as_rational()) {
            (Some(ra), Some(rb)) => {
                if ra.is_zero() {
                    let r = if rb.is_zero() { Some(BigRational::zero()) } else { None };
                    (if rb.is_zero() { 0.0 } else { f64::INFINITY }, r)
                } else {
                    let r = rb / (ra * &kq);
                    (FInterval::from_rational(&r).hi, Some(r))
                }
            }
            _ if a == b => {
                let r = BigRational::one() / &kq;
                (FInterval::from_rational(&r).hi, Some(r))
            }
            _ => {
                let ea = a.enclosure_f64();
                let eb = b.enclosure_f64();
                let den = ea.mul(&FInterval::from_u64(k));
                (if den.lo > 0.0 { eb.div(&den).hi } else { f64::INFINITY }, None)
            }
        };
        if !ok {
            holds = false;
            first_failure.get_or_insert(j);
        }
        max_hi = max_hi.max(hi);
        max_exact = match (max_exact, exact) {
            (Some(m), Some(r)) => Some(if r > m { r } else { m }),
            _ => None,
        };
        ratios.push((j, hi));
    }
    Ok(RegularityCheck {
        holds,
        kappa: BigRational::one() / kq,
        witnessed_kappa: max_hi,
        witnessed_exact: max_exact,
        ratios,
        first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> ApproxFunction {
        s.parse().unwrap()
    }

    #[test]
    fn literal_round_trip() {
        for s in ["q^-1/2", "q^-9/20*log^-1", "const:3/10", "phi:d=2", "max(q^-1/2,phi:d=2)"] {
            assert_eq!(f(s).to_string(), s);
        }
        assert_eq!(f("q^-0.5"), f("q^-1/2"));
        assert_eq!(f("q^(-0.45)"), f("q^-9/20"));
        assert_eq!(f("const:0.3"), f("const:3/10"));
        for bad in ["q^0.5", "const:-1", "phi:2", "max(q^-1)", "sqrt(q)", ""] {
            assert!(bad.parse::<ApproxFunction>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exact_evaluations() {
        assert_eq!(f("q^-1/2").eval(4, 64).unwrap().exact_value(), Some(&rat(1, 2)));
        assert_eq!(f("const:3/10").eval(1_000_000_000, 64).unwrap().exact_value(), Some(&rat(3, 10)));
        assert!(f("q^-1/2*log^-1").eval(1, 64).is_err());
        assert_eq!(f("phi:d=2").eval(1, 64).unwrap(), f("phi:d=2").eval(2, 64).unwrap());
    }

    #[test]
    fn table_semantics() {
        let t = ApproxFunction::table("t", vec![(2, rat(1, 2)), (5, rat(1, 4))]).unwrap();
        let v = |q| t.threshold_at(q).unwrap().as_rational().unwrap();
        assert_eq!(v(1), rat(1, 2));
        assert_eq!(v(4), rat(1, 2));
        assert_eq!(v(5), rat(1, 4));
        assert_eq!(v(6), rat(0, 1));
        assert!(ApproxFunction::table("t", vec![(1, rat(1, 4)), (2, rat(1, 2))]).is_err());
    }

    #[test]
    fn divergence_rule_on_increments() {
        let r = DivergenceRule::default();
        assert_eq!(r.classify(&[1.0; 8]), Verdict::Diverges);
        assert_eq!(r.classify(&[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]), Verdict::Converges);
        assert_eq!(r.classify(&[1.0, 1.0]), Verdict::Inconclusive);
    }
}
