//! Counting functions `Q_δ(M, N) = |{M < q ≤ N : ‖qx + γ‖ < δ}|`.
//!
//! Ranges are split into blocks of `2^16` integers that are scanned in
//! parallel and merged in block order, so counts and witness lists do not
//! depend on the number of workers.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use rayon::prelude::*;

use crate::approx::{ApproxFunction, SeriesSum};
use crate::error::{Error, Result};
use crate::real::kernel::{fast_below, ScanPoint, Tri};
use crate::real::{RealVector, Surd, Threshold};

/// Width of one scan block.
pub const BLOCK: u64 = 1 << 16;

/// Default cap on retained witnesses.
pub const DEFAULT_WITNESS_CAP: usize = 10_000;

/// The threshold of a counting query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delta {
    /// A fixed positive threshold, possibly irrational (e.g. `N^(-1/τ)`).
    Fixed(Threshold),
    /// `δ = ψ(N)`.
    Psi(ApproxFunction),
}

impl Delta {
    pub fn rational(r: BigRational) -> Delta {
        Delta::Fixed(Threshold::rational(r))
    }
}

#[derive(Clone, Debug)]
pub struct CountQuery {
    pub x: RealVector,
    pub delta: Delta,
    pub m: u64,
    pub n: u64,
    pub gamma: Option<RealVector>,
    /// Keep at most this many witnesses (`None` keeps none).
    pub witness_cap: Option<usize>,
}

impl CountQuery {
    pub fn new(x: RealVector, delta: Delta, m: u64, n: u64) -> Self {
        CountQuery { x, delta, m, n, gamma: None, witness_cap: None }
    }

    pub fn with_shift(mut self, gamma: RealVector) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_witnesses(mut self, cap: usize) -> Self {
        self.witness_cap = Some(cap);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountReport {
    pub count: u64,
    pub threshold: Threshold,
    /// `N·δ^ℓ − 1`.
    pub lemma_lower_bound: SeriesSum,
    /// `count ≥ N·δ^ℓ − 1`, decided exactly.
    pub bound_satisfied: bool,
    pub witnesses: Option<Vec<u64>>,
    /// More witnesses existed than the cap allowed.
    pub witnesses_truncated: bool,
}

fn annotate(e: Error, q: u64) -> Error {
    match e {
        Error::PrecisionExhausted { context, bits } => {
            Error::PrecisionExhausted { context: format!("q = {q}: {context}"), bits }
        }
        other => other,
    }
}

/// The blocks `(a, b]` partitioning `(lo, hi]`, aligned to multiples of [`BLOCK`].
pub fn blocks(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = ((a / BLOCK) + 1).saturating_mul(BLOCK).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

struct Partial {
    count: u64,
    witnesses: Vec<u64>,
}

fn merge(parts: Vec<Result<Partial>>, cap: Option<usize>) -> Result<(u64, Vec<u64>, bool)> {
    let mut count = 0;
    let mut witnesses = Vec::new();
    for p in parts {
        let p = p?;
        count += p.count;
        if let Some(cap) = cap {
            let room = cap.saturating_sub(witnesses.len());
            witnesses.extend(p.witnesses.into_iter().take(room));
        }
    }
    let truncated = cap.is_some() && (witnesses.len() as u64) < count;
    Ok((count, witnesses, truncated))
}

/// Counts `M < q ≤ N` with `‖q·x + γ‖ < thr`; optionally keeps the first `cap` witnesses.
pub fn scan_fixed(point: &ScanPoint, thr: &Threshold, m: u64, n: u64, cap: Option<usize>) -> Result<(u64, Vec<u64>, bool)> {
    if n > i64::MAX as u64 {
        return Err(Error::InvalidInput("N exceeds 2^63".into()));
    }
    let fx = thr.fixed();
    let parts: Vec<Result<Partial>> = blocks(m, n)
        .into_par_iter()
        .map(|(a, b)| {
            let mut count = 0;
            let mut witnesses = Vec::new();
            let keep = cap.unwrap_or(0);
            for q in a + 1..=b {
                if point.below(q as i64, thr, &fx).map_err(|e| annotate(e, q))? {
                    count += 1;
                    if witnesses.len() < keep {
                        witnesses.push(q);
                    }
                }
            }
            Ok(Partial { count, witnesses })
        })
        .collect();
    merge(parts, cap)
}

/// All `q ∈ (lo, hi]` with `‖q·x + γ‖ < ψ(q)`, in increasing order.
pub fn qualifying_q(point: &ScanPoint, psi: &ApproxFunction, lo: u64, hi: u64) -> Result<Vec<u64>> {
    if hi > i64::MAX as u64 {
        return Err(Error::InvalidInput("range exceeds 2^63".into()));
    }
    let monotone = psi.is_nonincreasing();
    let parts: Vec<Result<Vec<u64>>> = blocks(lo, hi)
        .into_par_iter()
        .map(|(a, b)| {
            // ψ is nonincreasing, so ψ(a+1) and ψ(b) bracket every threshold in the block
            let (upper, lower) = if monotone {
                (Some(psi.threshold_at(a + 1)?.fixed()), Some(psi.threshold_at(b)?.fixed()))
            } else {
                (None, None)
            };
            let mut out = Vec::new();
            for q in a + 1..=b {
                let d = point.dist_enc(q as i64);
                if let Some(u) = &upper {
                    if fast_below(&d, u) == Tri::No {
                        continue;
                    }
                }
                if let Some(l) = &lower {
                    if fast_below(&d, l) == Tri::Yes {
                        out.push(q);
                        continue;
                    }
                }
                let thr = psi.threshold_at(q)?;
                if point.below(q as i64, &thr, &thr.fixed()).map_err(|e| annotate(e, q))? {
                    out.push(q);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

fn scan_point(x: &RealVector, gamma: Option<&RealVector>) -> Result<ScanPoint> {
    match gamma {
        Some(g) => ScanPoint::with_shift(x, g),
        None => ScanPoint::new(x),
    }
}

/// `N·δ^ℓ` as a threshold.
fn lemma_mass(delta: &Threshold, n: u64, ell: usize) -> Threshold {
    delta.powi(ell as u32).scale(&BigRational::from_integer(BigInt::from(n)))
}

fn minus_one(t: &Threshold) -> SeriesSum {
    SeriesSum::zero().add_threshold(t).shift(&-BigRational::one())
}

/// `Q_δ(M, N)` with the lemma bound `count ≥ N·δ^ℓ − 1` decided exactly.
pub fn count_q(query: &CountQuery) -> Result<CountReport> {
    if query.n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if query.m >= query.n {
        return Err(Error::InvalidInput(format!("need M < N, got M = {} and N = {}", query.m, query.n)));
    }
    let threshold = match &query.delta {
        Delta::Fixed(t) => t.clone(),
        Delta::Psi(psi) => psi.threshold_at(query.n)?,
    };
    let point = scan_point(&query.x, query.gamma.as_ref())?;
    let (count, witnesses, truncated) = scan_fixed(&point, &threshold, query.m, query.n, query.witness_cap)?;
    let mass = lemma_mass(&threshold, query.n, query.x.dim());
    let bound_satisfied = !mass.exceeds(&Surd::from_int(count as i64 + 1))?;
    Ok(CountReport {
        count,
        lemma_lower_bound: minus_one(&mass),
        bound_satisfied,
        threshold,
        witnesses: query.witness_cap.map(|_| witnesses),
        witnesses_truncated: truncated,
    })
}

/// Outcome of one bound check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub pass: bool,
    pub count: u64,
    pub bound: SeriesSum,
    /// `count − bound` (lower) or `bound − count` (upper), as an enclosure.
    pub margin: SeriesSum,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (count {}, bound {}, margin {})", if self.pass { "pass" } else { "fail" }, self.count, self.bound, self.margin)
    }
}

/// `|{q ≤ N : ‖qx‖ < δ}| ≥ N·δ^ℓ − 1`.
pub fn verify_count_lower_bound(x: &RealVector, delta: &BigRational, n: u64) -> Result<CheckResult> {
    if !delta.is_positive() || delta >= &BigRational::one() {
        return Err(Error::InvalidInput(format!("δ must lie in (0, 1), got {delta}")));
    }
    let r = count_q(&CountQuery::new(x.clone(), Delta::rational(delta.clone()), 0, n))?;
    let count = BigRational::from_integer(BigInt::from(r.count));
    let margin = SeriesSum::zero().shift(&count).sub(&r.lemma_lower_bound);
    Ok(CheckResult { pass: r.bound_satisfied, count: r.count, bound: r.lemma_lower_bound, margin })
}

/// One row of a block table: `(j, q_lo, q_hi, threshold, count, bound, pass)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRow {
    pub j: u32,
    /// Exclusive lower end.
    pub q_lo: u64,
    pub q_hi: u64,
    pub threshold: Threshold,
    pub count: u64,
    pub bound: Option<SeriesSum>,
    pub pass: Option<bool>,
}

/// `Q` over `(k^{j-1}, k^j]` with threshold `ψ(k^j)` for `j = 1..=j_max`.
pub fn block_counts(x: &RealVector, psi: &ApproxFunction, k: u64, j_max: u32) -> Result<Vec<BlockRow>> {
    if k < 2 || j_max == 0 {
        return Err(Error::InvalidInput("need k ≥ 2 and j_max ≥ 1".into()));
    }
    let point = ScanPoint::new(x)?;
    let mut rows = Vec::new();
    for j in 1..=j_max {
        let (lo, hi) = (pow_u64(k, j - 1)?, pow_u64(k, j)?);
        let threshold = psi.threshold_at(hi)?;
        let (count, _, _) = scan_fixed(&point, &threshold, lo, hi, None)?;
        rows.push(BlockRow { j, q_lo: lo, q_hi: hi, threshold, count, bound: None, pass: None });
    }
    Ok(rows)
}

pub(crate) fn pow_u64(k: u64, j: u32) -> Result<u64> {
    k.checked_pow(j).ok_or_else(|| Error::BudgetExceeded(format!("{k}^{j} overflows 64 bits")))
}

/// Partial sums of `Σ ψ(q)^e` over `q ≤ Q_max` with `‖qx‖ < ψ(q)`, at
/// `Q = 1, 2, 4, …` and at `Q_max`.
pub fn partial_series(x: &RealVector, psi: &ApproxFunction, k_exp: u32, q_max: u64) -> Result<Vec<(u64, SeriesSum)>> {
    if q_max == 0 {
        return Err(Error::InvalidInput("Q_max must be at least 1".into()));
    }
    let point = ScanPoint::new(x)?;
    let qs = qualifying_q(&point, psi, 0, q_max)?;
    let mut checkpoints = Vec::new();
    let mut c = 1u64;
    while c < q_max {
        checkpoints.push(c);
        c = c.saturating_mul(2);
    }
    checkpoints.push(q_max);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = SeriesSum::zero();
    let mut i = 0;
    for &cp in &checkpoints {
        while i < qs.len() && qs[i] <= cp {
            acc = acc.add_threshold(&psi.threshold_at(qs[i])?.powi(k_exp));
            i += 1;
        }
        out.push((cp, acc.clone()));
    }
    Ok(out)
}

/// Per-`j` audit of `|{0 < q ≤ k^{j+s} : ‖qx‖ < ψ(k^j)}| ≤ C·k^{j+s}·ψ(k^j)^{d−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorReport {
    pub rows: Vec<BlockRow>,
    pub c: BigRational,
    /// Least `j` from which the bound holds through the end of the range.
    pub holds_from: Option<u32>,
    /// The base point is rational, so `τ_D = ∞` and failure is expected.
    pub expected_failure: bool,
}

/// Default constant `4^d`.
pub fn default_cor_constant(d: u32) -> BigRational {
    BigRational::from_integer(Pow::pow(BigInt::from(4), d))
}

pub fn verify_cor_nalpha(
    x: &RealVector,
    psi: &ApproxFunction,
    k: u64,
    ell_shift: i32,
    j_lo: u32,
    j_hi: u32,
    c: Option<BigRational>,
) -> Result<CorReport> {
    if k < 2 || j_hi < j_lo {
        return Err(Error::InvalidInput("need k ≥ 2 and a nonempty j range".into()));
    }
    let d = x.dim() as u32 + 1;
    let c = c.unwrap_or_else(|| default_cor_constant(d));
    if !c.is_positive() {
        return Err(Error::InvalidInput("C must be positive".into()));
    }
    let point = ScanPoint::new(x)?;
    let mut rows = Vec::new();
    for j in j_lo..=j_hi {
        let e = j as i64 + ell_shift as i64;
        if e < 0 {
            return Err(Error::InvalidInput(format!("j + shift = {e} is negative")));
        }
        let top = pow_u64(k, e as u32)?;
        let threshold = psi.threshold_at(pow_u64(k, j)?)?;
        let (count, _, _) = scan_fixed(&point, &threshold, 0, top, None)?;
        let bound = threshold.powi(d - 1).scale(&(&c * BigRational::from_integer(BigInt::from(top))));
        let pass = bound.at_least(&Surd::from_int(count as i64))?;
        rows.push(BlockRow {
            j,
            q_lo: 0,
            q_hi: top,
            threshold,
            count,
            bound: Some(SeriesSum::zero().add_threshold(&bound)),
            pass: Some(pass),
        });
    }
    let holds_from = holds_from(rows.iter().map(|r| (r.j, r.pass == Some(true))));
    Ok(CorReport { rows, c, holds_from, expected_failure: x.is_rational() })
}

/// Least `j` such that every later entry passes.
pub fn holds_from(flags: impl DoubleEndedIterator<Item = (u32, bool)>) -> Option<u32> {
    let mut first = None;
    for (j, ok) in flags.rev() {
        if !ok {
            break;
        }
        first = Some(j);
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn blocks_partition_the_range() {
        let b = blocks(5, 3 * BLOCK + 7);
        assert_eq!(b.first(), Some(&(5, BLOCK)));
        assert_eq!(b.last(), Some(&(3 * BLOCK, 3 * BLOCK + 7)));
        assert!(b.windows(2).all(|w| w[0].1 == w[1].0));
        assert!(blocks(9, 9).is_empty());
    }

    #[test]
    fn holds_from_scans_suffix() {
        assert_eq!(holds_from([(1, true), (2, false), (3, true), (4, true)].into_iter()), Some(3));
        assert_eq!(holds_from([(1, true), (2, false)].into_iter()), None);
    }

    #[test]
    fn half_point_counts() {
        let x: RealVector = "1/2".parse().unwrap();
        let r = count_q(&CountQuery::new(x, Delta::rational(rat(3, 10)), 0, 10).with_witnesses(100)).unwrap();
        assert_eq!(r.count, 5);
        assert_eq!(r.witnesses, Some(vec![2, 4, 6, 8, 10]));
        assert_eq!(r.lemma_lower_bound.exact, Some(rat(2, 1)));
        assert!(r.bound_satisfied);
    }
}
