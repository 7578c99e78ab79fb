//! Measures of finite unions of rational balls in `[0,1]`, the Minkowski
//! covering, and the ubiquity conditions (U), (R), (D) along `q = k^j`.
//!
//! Large unions are swept in 64-bit fixed point: each ball is shrunk to an
//! inner interval with grid endpoints, so the swept measure is a certified
//! lower bound, and the total shrinkage bounds the measure from above.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::approx::{check_u_regular, classify_divergence_base, ApproxFunction, DivergenceRule, DivergenceVerdict, RegularityCheck, SeriesSum, Verdict};
use crate::counting::{holds_from, pow_u64, scan_fixed};
use crate::error::{Error, Result};
use crate::real::ball::Ball;
use crate::real::kernel::ScanPoint;
use crate::real::{RealVector, Threshold};

const FRAC_BITS: u32 = 64;
const ONE: u128 = 1 << FRAC_BITS;
const BALL_PREC: u32 = 192;

fn dyadic(n: u128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::one() << FRAC_BITS)
}

/// A finite union of closed intervals in `[0,1]`, kept sorted and disjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(BigRational, BigRational)>,
    /// Measure of `intervals`; a lower bound for the represented set.
    lower: BigRational,
    upper: BigRational,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new(), lower: BigRational::zero(), upper: BigRational::zero() }
    }

    /// Clips to `[0,1]`, sorts and merges; the measure is exact.
    pub fn from_intervals(items: impl IntoIterator<Item = (BigRational, BigRational)>) -> Self {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let mut v: Vec<(BigRational, BigRational)> = items
            .into_iter()
            .map(|(a, b)| (a.max(zero.clone()), b.min(one.clone())))
            .filter(|(a, b)| a <= b)
            .collect();
        v.sort();
        let mut merged: Vec<(BigRational, BigRational)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match merged.last_mut() {
                Some((_, r)) if a <= *r => {
                    if b > *r {
                        *r = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        let measure = merged.iter().fold(BigRational::zero(), |acc, (a, b)| acc + (b - a));
        IntervalUnion { intervals: merged, lower: measure.clone(), upper: measure }
    }

    fn from_sweep(s: Sweep) -> Self {
        let intervals = s.runs.unwrap_or_default().into_iter().map(|(a, b)| (dyadic(a), dyadic(b))).collect();
        IntervalUnion { intervals, lower: dyadic(s.lower), upper: dyadic(s.upper.min(ONE)) }
    }

    pub fn intervals(&self) -> &[(BigRational, BigRational)] {
        &self.intervals
    }

    /// Certified bounds on the measure of the represented set.
    pub fn measure(&self) -> Measure {
        Measure { lower: self.lower.clone(), upper: self.upper.clone() }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn union(&self, o: &IntervalUnion) -> IntervalUnion {
        let slack = (&self.upper - &self.lower) + (&o.upper - &o.lower);
        let mut u = IntervalUnion::from_intervals(self.intervals.iter().chain(o.intervals.iter()).cloned());
        u.upper = (&u.lower + slack).min(BigRational::one());
        u
    }

    /// Every stored interval of `self` lies inside one stored interval of `o`.
    pub fn is_subset_of(&self, o: &IntervalUnion) -> bool {
        self.intervals.iter().all(|(a, b)| {
            let i = o.intervals.partition_point(|(l, _)| l <= a);
            i > 0 && o.intervals[i - 1].1 >= *b
        })
    }
}

/// Certified measure bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    pub lower: BigRational,
    pub upper: BigRational,
}

impl Measure {
    pub fn exact(&self) -> Option<&BigRational> {
        (self.lower == self.upper).then_some(&self.lower)
    }

    pub fn lower_f64(&self) -> f64 {
        self.lower.to_f64().unwrap_or(0.0)
    }

    pub fn upper_f64(&self) -> f64 {
        self.upper.to_f64().unwrap_or(1.0)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "[{:.17e},{:.17e}]", self.lower_f64(), self.upper_f64()),
        }
    }
}

/// `⋃ B(p/q, r(q))` over the given centers, clipped to `[0,1]`, with exact endpoints.
pub fn union_of_balls(centers: &[(i64, u64)], radius: impl Fn(u64) -> BigRational) -> Result<IntervalUnion> {
    let mut items = Vec::with_capacity(centers.len());
    for &(p, q) in centers {
        if q == 0 {
            return Err(Error::InvalidInput("center denominator must be positive".into()));
        }
        let r = radius(q);
        if !r.is_positive() {
            return Err(Error::InvalidInput(format!("radius at q = {q} must be positive, got {r}")));
        }
        let c = BigRational::new(BigInt::from(p), BigInt::from(q));
        items.push((&c - &r, c + r));
    }
    Ok(IntervalUnion::from_intervals(items))
}

/// Balls of radius in `[r_lo, r_hi]·2^-64` around every `p/q`, `0 ≤ p ≤ q`.
#[derive(Clone, Copy, Debug)]
struct Family {
    q: u64,
    r_lo: u128,
    r_hi: u128,
}

struct Sweep {
    lower: u128,
    upper: u128,
    runs: Option<Vec<(u128, u128)>>,
}

fn inner_interval(f: &Family, p: u64) -> (u128, u128) {
    let num = (p as u128) << FRAC_BITS;
    let q = f.q as u128;
    let cf = num / q;
    let cc = if num % q == 0 { cf } else { cf + 1 };
    (cc.saturating_sub(f.r_lo), cf.saturating_add(f.r_lo).min(ONE))
}

fn events(fams: &[Family]) -> u128 {
    fams.iter().map(|f| f.q as u128 + 1).sum()
}

/// k-way merge of the per-family interval streams, sorted by left endpoint.
fn sweep(fams: &[Family], keep_runs: bool) -> Sweep {
    // shrinkage of each ball: two center roundings plus the radius gap on both sides
    let slack: u128 = fams.iter().map(|f| (f.q as u128 + 1) * (2 * (f.r_hi - f.r_lo) + 2)).sum();
    let mut runs = keep_runs.then(Vec::new);
    let mut heap = BinaryHeap::new();
    let mut full = false;
    for (i, f) in fams.iter().enumerate() {
        if f.r_lo == 0 {
            continue;
        }
        // adjacent balls overlap, so the family alone covers [0,1]
        if 2 * f.r_lo >= ONE / f.q as u128 + 2 {
            full = true;
            break;
        }
        let (a, b) = inner_interval(f, 0);
        heap.push(Reverse((a, b, i, 0u64)));
    }
    if full {
        if let Some(r) = runs.as_mut() {
            r.push((0, ONE));
        }
        return Sweep { lower: ONE, upper: ONE, runs };
    }
    let mut lower: u128 = 0;
    let mut cur: Option<(u128, u128)> = None;
    while let Some(Reverse((a, b, i, p))) = heap.pop() {
        let f = &fams[i];
        if p < f.q {
            let (a2, b2) = inner_interval(f, p + 1);
            heap.push(Reverse((a2, b2, i, p + 1)));
        }
        cur = match cur {
            Some((l, r)) if a <= r => Some((l, r.max(b))),
            Some((l, r)) => {
                lower += r - l;
                if let Some(v) = runs.as_mut() {
                    v.push((l, r));
                }
                Some((a, b))
            }
            None => Some((a, b)),
        };
        if cur == Some((0, ONE)) {
            break;
        }
    }
    if let Some((l, r)) = cur {
        lower += r - l;
        if let Some(v) = runs.as_mut() {
            v.push((l, r));
        }
    }
    Sweep { lower, upper: (lower + slack).min(ONE), runs }
}

/// `⌊b_lo·2^64⌋` and `⌈b_hi·2^64⌉` for a nonnegative ball.
fn fixed_bounds(b: &Ball) -> (u128, u128) {
    let scale = BigRational::from_integer(BigInt::one() << FRAC_BITS);
    let cap = BigInt::from(ONE) << 8u32;
    let lo = (b.lower() * &scale).floor().to_integer().max(BigInt::zero()).min(cap.clone());
    let hi = (b.upper() * &scale).ceil().to_integer().max(BigInt::zero()).min(cap);
    (lo.to_u128().unwrap_or(0), hi.to_u128().unwrap_or(0))
}

/// Enclosure of `num / (den·ψ^{d−1})`, or `None` when `ψ = 0`.
fn radius_ball(num: &BigRational, den: &BigInt, psi_n: &Threshold, d: u32) -> Option<Ball> {
    if psi_n.is_zero() && d > 1 {
        return None;
    }
    let p = psi_n.powi(d - 1).ball(BALL_PREC).mul(&Ball::from_int(den, BALL_PREC));
    Ball::from_rational(num, BALL_PREC).div(&p)
}

/// Condition `N^{−1/(d−1)} < ψ(N) < 1`.
pub fn check_nreq(psi: &ApproxFunction, d: u32, n: u64) -> Result<bool> {
    if d < 2 {
        return Err(Error::InvalidInput("the covering needs d ≥ 2".into()));
    }
    let v = psi.threshold_at(n)?;
    let floor = Threshold::power(n, -BigRational::new(BigInt::one(), BigInt::from(d - 1)));
    Ok(floor.cmp(&v)?.is_lt() && v.cmp(&Threshold::rational(BigRational::one()))?.is_lt())
}

/// `q ∈ (lo, hi]` with `‖q·x‖ < thr`, refusing more than `max` of them.
fn qualifying_fixed(point: &ScanPoint, thr: &Threshold, lo: u64, hi: u64, max: usize) -> Result<Vec<u64>> {
    let (count, qs, truncated) = scan_fixed(point, thr, lo, hi, Some(max))?;
    if truncated || count as usize > max {
        return Err(Error::BudgetExceeded(format!("more than {max} qualifying q in ({lo}, {hi}]")));
    }
    Ok(qs)
}

fn check_events(fams: &[Family], max_events: u64, what: &str) -> Result<()> {
    let e = events(fams);
    if e > max_events as u128 {
        return Err(Error::BudgetExceeded(format!("{what} needs {e} balls (cap {max_events})")));
    }
    Ok(())
}

/// Default cap on the number of balls swept per union.
pub const DEFAULT_MAX_EVENTS: u64 = 400_000_000;

/// The covering `⋃_{q ≤ N, ‖qx‖ < ψ(N)} ⋃_{p=0}^{q} B(p/q, 2/(qNψ(N)^{d−1}))` with `d = dim x + 1`.
pub fn mink_cover(x: &RealVector, psi: &ApproxFunction, n: u64, max_events: u64) -> Result<IntervalUnion> {
    let d = x.dim() as u32 + 1;
    if !check_nreq(psi, d, n)? {
        return Err(Error::PreconditionViolated(format!(
            "N^(-1/(d-1)) < psi(N) < 1 fails for N = {n}, d = {d}, psi = {psi}"
        )));
    }
    let psi_n = psi.threshold_at(n)?;
    let point = ScanPoint::new(x)?;
    let qs = qualifying_fixed(&point, &psi_n, 0, n, (max_events / 2) as usize)?;
    let two = BigRational::from_integer(BigInt::from(2));
    let rho = radius_ball(&two, &BigInt::from(n), &psi_n, d).ok_or_else(|| Error::Domain("ψ(N) = 0".into()))?;
    let (lo, hi) = fixed_bounds(&rho);
    let fams: Vec<Family> = qs.iter().map(|&q| Family { q, r_lo: lo / q as u128, r_hi: hi.div_ceil(q as u128) }).collect();
    check_events(&fams, max_events, "the covering")?;
    Ok(IntervalUnion::from_sweep(sweep(&fams, true)))
}

/// Outcome of one condition over a finite `j` range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionVerdict {
    HoldsFrom(u32),
    Fails,
    Inconclusive,
}

impl fmt::Display for ConditionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionVerdict::HoldsFrom(j) => write!(f, "holds-from({j})"),
            ConditionVerdict::Fails => f.write_str("fails"),
            ConditionVerdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UbiquityConfig {
    pub kappa_floor: BigRational,
    /// Cap on `k^j`.
    pub max_n: u64,
    pub max_events: u64,
    /// Fewest trailing `j` values a "holds from" verdict must span in `select_k`.
    pub min_tail: u32,
    pub rule: DivergenceRule,
}

impl Default for UbiquityConfig {
    fn default() -> Self {
        UbiquityConfig {
            kappa_floor: BigRational::new(BigInt::one(), BigInt::from(20)),
            max_n: 100_000_000,
            max_events: DEFAULT_MAX_EVENTS,
            min_tail: 3,
            rule: DivergenceRule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UbiquityRow {
    pub j: u32,
    /// `k^j`.
    pub n: u64,
    pub nreq: bool,
    /// Qualifying `q ∈ (k^{j−1}, k^j]`.
    pub block_count: u64,
    /// Measure of the (U) union with radius `c/(k^{2j}ψ(k^j)^{d−1})`.
    pub union_measure: Measure,
    /// Qualifying `q ≤ k^{j−1}`.
    pub small_count: u64,
    /// Measure of the small-`q` part of the covering with `N = k^j`.
    pub small_mass: Measure,
    /// Upper enclosure of `Ψ(k^{j+1})/Ψ(k^j)`.
    pub r_ratio: f64,
    /// `Σ_{j_lo ≤ i ≤ j} k^i ψ(k^i)^d`.
    pub d_partial: SeriesSum,
    /// `Σ Ψ(k^i)/ρ(k^i)`, the raw sum divided by `c`.
    pub d_normalized: SeriesSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UbiquityReport {
    pub k: u64,
    pub c: BigRational,
    pub d: u32,
    pub kappa_floor: BigRational,
    pub rows: Vec<UbiquityRow>,
    /// Least certified (U) measure over `j ≥ j₀`.
    pub kappa_witness: Option<BigRational>,
    pub u: ConditionVerdict,
    pub r: ConditionVerdict,
    pub d_verdict: ConditionVerdict,
    /// Rows satisfy `small_mass ≤ 1 − κ_floor` from this `j` on.
    pub displacement_from: Option<u32>,
    pub regularity: RegularityCheck,
    pub divergence: DivergenceVerdict,
}

fn row(
    point: &ScanPoint,
    psi: &ApproxFunction,
    d: u32,
    k: u64,
    c: &BigRational,
    j: u32,
    cfg: &UbiquityConfig,
) -> Result<(u32, u64, bool, u64, Measure, u64, Measure)> {
    let n = pow_u64(k, j)?;
    if n > cfg.max_n {
        return Err(Error::BudgetExceeded(format!("k^j = {k}^{j} exceeds the scan cap {}", cfg.max_n)));
    }
    let split = n / k;
    let nreq = check_nreq(psi, d, n)?;
    let psi_n = psi.threshold_at(n)?;
    let qs = qualifying_fixed(point, &psi_n, 0, n, (cfg.max_events / 2) as usize)?;
    let (small, block): (Vec<u64>, Vec<u64>) = qs.iter().partition(|&&q| q <= split);
    let nb = BigInt::from(n);
    let zero = Measure { lower: BigRational::zero(), upper: BigRational::zero() };
    let u_measure = match radius_ball(c, &(&nb * &nb), &psi_n, d) {
        Some(r) if !block.is_empty() => {
            let (lo, hi) = fixed_bounds(&r);
            let fams: Vec<Family> = block.iter().map(|&q| Family { q, r_lo: lo, r_hi: hi }).collect();
            check_events(&fams, cfg.max_events, "the (U) union")?;
            IntervalUnion::from_sweep(sweep(&fams, false)).measure()
        }
        _ => zero.clone(),
    };
    let two = BigRational::from_integer(BigInt::from(2));
    let small_mass = match radius_ball(&two, &nb, &psi_n, d) {
        Some(r) if !small.is_empty() => {
            let (lo, hi) = fixed_bounds(&r);
            let fams: Vec<Family> =
                small.iter().map(|&q| Family { q, r_lo: lo / q as u128, r_hi: hi.div_ceil(q as u128) }).collect();
            check_events(&fams, cfg.max_events, "the small-q union")?;
            IntervalUnion::from_sweep(sweep(&fams, false)).measure()
        }
        _ => zero,
    };
    Ok((j, n, nreq, block.len() as u64, u_measure, small.len() as u64, small_mass))
}

fn assemble(
    psi: &ApproxFunction,
    d: u32,
    k: u64,
    c: &BigRational,
    partial: Vec<(u32, u64, bool, u64, Measure, u64, Measure)>,
    cfg: &UbiquityConfig,
) -> Result<UbiquityReport> {
    let (j_lo, j_hi) = match (partial.first(), partial.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::InvalidInput("empty j range".into())),
    };
    let regularity = check_u_regular(psi, k, j_lo, j_hi)?;
    let divergence = classify_divergence_base(psi, d, k, j_lo, j_hi, &cfg.rule)?;
    let c_inv = c.recip();
    let rows: Vec<UbiquityRow> = partial
        .into_iter()
        .zip(regularity.ratios.iter())
        .zip(divergence.partial_sums.iter())
        .map(|((p, &(_, ratio)), (_, sum))| UbiquityRow {
            j: p.0,
            n: p.1,
            nreq: p.2,
            block_count: p.3,
            union_measure: p.4,
            small_count: p.5,
            small_mass: p.6,
            r_ratio: ratio,
            d_partial: sum.clone(),
            d_normalized: sum.scale(&c_inv),
        })
        .collect();
    let floor = &cfg.kappa_floor;
    let u_from = holds_from(rows.iter().map(|r| (r.j, r.union_measure.lower >= *floor)));
    let kappa_witness =
        u_from.and_then(|j0| rows.iter().filter(|r| r.j >= j0).map(|r| r.union_measure.lower.clone()).min());
    let ceiling = BigRational::one() - floor;
    let displacement_from = holds_from(rows.iter().map(|r| (r.j, r.small_mass.upper <= ceiling)));
    let u = match u_from {
        Some(j0) => ConditionVerdict::HoldsFrom(j0),
        None => ConditionVerdict::Fails,
    };
    let r = if regularity.holds { ConditionVerdict::HoldsFrom(j_lo) } else { ConditionVerdict::Fails };
    let d_verdict = match divergence.verdict {
        Verdict::Diverges => ConditionVerdict::HoldsFrom(j_lo),
        Verdict::Converges => ConditionVerdict::Fails,
        Verdict::Inconclusive => ConditionVerdict::Inconclusive,
    };
    Ok(UbiquityReport {
        k,
        c: c.clone(),
        d,
        kappa_floor: floor.clone(),
        rows,
        kappa_witness,
        u,
        r,
        d_verdict,
        displacement_from,
        regularity,
        divergence,
    })
}

fn validate(x: &RealVector, d: u32, k: u64) -> Result<ScanPoint> {
    if x.dim() as u32 + 1 != d {
        return Err(Error::InvalidInput(format!("x has dimension {} but d = {d} needs {}", x.dim(), d.saturating_sub(1))));
    }
    if k < 2 {
        return Err(Error::InvalidInput("k must be at least 2".into()));
    }
    ScanPoint::new(x)
}

/// Evaluates (U), (R) and (D) for `j_lo ≤ j ≤ j_hi`.
pub fn check_conditions(
    x: &RealVector,
    psi: &ApproxFunction,
    d: u32,
    k: u64,
    c: &BigRational,
    j_lo: u32,
    j_hi: u32,
    cfg: &UbiquityConfig,
) -> Result<UbiquityReport> {
    let point = validate(x, d, k)?;
    if !c.is_positive() {
        return Err(Error::InvalidInput("c must be positive".into()));
    }
    if j_lo == 0 || j_hi < j_lo {
        return Err(Error::InvalidInput(format!("invalid j range {j_lo}..={j_hi}")));
    }
    let partial = (j_lo..=j_hi).map(|j| row(&point, psi, d, k, c, j, cfg)).collect::<Result<Vec<_>>>()?;
    assemble(psi, d, k, c, partial, cfg)
}

/// Per-`k` outcome of the selection sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct KDiagnostic {
    pub k: u64,
    /// Largest `j` evaluated before a budget stopped the sweep.
    pub j_evaluated: Option<u32>,
    pub stopped_by: Option<String>,
    pub displacement_from: Option<u32>,
    pub u: Option<ConditionVerdict>,
    pub kappa_witness: Option<BigRational>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectKReport {
    pub chosen: Option<UbiquityReport>,
    pub diagnostics: Vec<KDiagnostic>,
}

fn tail_ok(from: Option<u32>, j_end: u32, min_tail: u32) -> bool {
    from.is_some_and(|j0| j_end + 1 >= j0 + min_tail)
}

/// Smallest `k` whose small-`q` mass stays below `1 − κ_floor` and whose (U)
/// measure stays above `κ_floor`, both over at least `min_tail` trailing `j`.
/// The range in `j` is cut per `k` where the budgets run out.
pub fn select_k(
    x: &RealVector,
    psi: &ApproxFunction,
    d: u32,
    ks: &[u64],
    j_lo: u32,
    j_hi: u32,
    cfg: &UbiquityConfig,
) -> Result<SelectKReport> {
    if ks.is_empty() {
        return Err(Error::InvalidInput("empty k search range".into()));
    }
    if j_lo == 0 || j_hi < j_lo {
        return Err(Error::InvalidInput(format!("invalid j range {j_lo}..={j_hi}")));
    }
    let mut diagnostics = Vec::new();
    for &k in ks {
        let point = validate(x, d, k)?;
        let c = BigRational::from_integer(BigInt::from(2 * k));
        let mut partial = Vec::new();
        let mut stopped_by = None;
        for j in j_lo..=j_hi {
            match row(&point, psi, d, k, &c, j, cfg) {
                Ok(r) => partial.push(r),
                Err(Error::BudgetExceeded(m)) => {
                    stopped_by = Some(m);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if partial.is_empty() {
            diagnostics.push(KDiagnostic {
                k,
                j_evaluated: None,
                stopped_by,
                displacement_from: None,
                u: None,
                kappa_witness: None,
                accepted: false,
            });
            continue;
        }
        let report = assemble(psi, d, k, &c, partial, cfg)?;
        let j_end = report.rows.last().map(|r| r.j).unwrap_or(j_lo);
        let u_from = match report.u {
            ConditionVerdict::HoldsFrom(j0) => Some(j0),
            _ => None,
        };
        let accepted =
            tail_ok(report.displacement_from, j_end, cfg.min_tail) && tail_ok(u_from, j_end, cfg.min_tail);
        diagnostics.push(KDiagnostic {
            k,
            j_evaluated: Some(j_end),
            stopped_by,
            displacement_from: report.displacement_from,
            u: Some(report.u),
            kappa_witness: report.kappa_witness.clone(),
            accepted,
        });
        if accepted {
            return Ok(SelectKReport { chosen: Some(report), diagnostics });
        }
    }
    Ok(SelectKReport { chosen: None, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn overlap_merge() {
        let u = IntervalUnion::from_intervals(vec![(rat(0, 1), rat(1, 2)), (rat(1, 4), rat(3, 4))]);
        assert_eq!(u.measure().exact(), Some(&rat(3, 4)));
        assert_eq!(u.intervals().len(), 1);
    }

    #[test]
    fn sweep_matches_exact_union() {
        let fams = [Family { q: 2, r_lo: ONE / 8, r_hi: ONE / 8 }, Family { q: 1, r_lo: ONE / 8, r_hi: ONE / 8 }];
        let s = sweep(&fams, true);
        let runs = s.runs.unwrap();
        assert_eq!(runs, vec![(0, ONE / 8), (3 * ONE / 8, 5 * ONE / 8), (7 * ONE / 8, ONE)]);
        assert_eq!(s.lower, ONE / 2);
    }

    #[test]
    fn wide_family_short_circuits() {
        let s = sweep(&[Family { q: 3, r_lo: ONE / 5, r_hi: ONE / 5 }], false);
        assert_eq!(s.lower, ONE);
    }
}
