//! Sampled probes of the measure of ψ-approximable points on the fiber
//! `{x} × [0,1]^k`.
//!
//! The test `‖q·x‖ < ψ(q)` does not depend on `y`, so the qualifying `q` are
//! listed once and every sample only checks `‖q·y‖ < ψ(q)` on that list.
//! Samples are rational: grid points `(i+1)/(n+1)` or Monte Carlo draws
//! `m/2^53`, so each comparison is decided exactly.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{ApproxFunction, SeriesSum};
use crate::counting::{partial_series, qualifying_q};
use crate::error::{Error, Result};
use crate::real::kernel::ScanPoint;
use crate::real::{RealVector, Surd, Threshold};

/// Generator behind Monte Carlo sampling: ChaCha20 seeded from a `u64`,
/// each coordinate the top 53 bits of one `next_u64` draw.
pub const MONTE_CARLO_ALGORITHM: &str = "chacha20-u53";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// `n_points` grid points in total, `n_points^{1/k}` per axis.
    Grid { n_points: u64 },
    MonteCarlo { n_points: u64, seed: u64 },
}

impl Sampling {
    pub fn n_points(&self) -> u64 {
        match self {
            Sampling::Grid { n_points } | Sampling::MonteCarlo { n_points, .. } => *n_points,
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampling::Grid { n_points } => write!(f, "grid({n_points})"),
            Sampling::MonteCarlo { n_points, seed } => write!(f, "monte-carlo({n_points},{seed})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureExperiment {
    pub x: RealVector,
    pub psi: ApproxFunction,
    /// Fiber dimension.
    pub k: u32,
    pub q0: u64,
    pub q_max: u64,
    pub sampling: Sampling,
}

impl MeasureExperiment {
    pub fn d(&self) -> u32 {
        self.x.dim() as u32 + self.k
    }
}

/// One coordinate `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coord {
    pub num: u64,
    pub den: u64,
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub y: Vec<Coord>,
    pub witness_count: u64,
    pub first_witness: Option<u64>,
    /// Comparisons that could not be decided; counted as non-witnesses.
    pub undecided: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionReport {
    pub q0: u64,
    pub q_max: u64,
    pub sampling: Sampling,
    pub n_points: u64,
    pub witnessed: u64,
    pub fraction: BigRational,
    /// Binomial standard error `√(p(1−p)/n)`.
    pub sigma: f64,
    /// Qualifying `q ∈ (Q0, Q_max]` for `x` alone.
    pub qualifying: usize,
    pub undecided_points: u64,
    pub points: Vec<PointResult>,
}

impl FractionReport {
    pub fn fraction_f64(&self) -> f64 {
        self.fraction.to_f64().unwrap_or(0.0)
    }
}

fn integer_root(n: u64, k: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|m| m.checked_pow(k) == Some(n))
}

/// Sample points in a fixed order.
pub fn samples(sampling: &Sampling, k: u32) -> Result<Vec<Vec<Coord>>> {
    if k == 0 {
        return Err(Error::InvalidInput("fiber dimension must be positive".into()));
    }
    match *sampling {
        Sampling::Grid { n_points } => {
            let m = integer_root(n_points, k).filter(|m| *m > 0).ok_or_else(|| {
                Error::InvalidInput(format!("grid of {n_points} points is not a {k}-th power"))
            })?;
            let mut out = Vec::with_capacity(n_points as usize);
            let mut idx = vec![0u64; k as usize];
            loop {
                out.push(idx.iter().map(|&i| Coord { num: i + 1, den: m + 1 }).collect());
                let mut t = k as usize;
                loop {
                    if t == 0 {
                        return Ok(out);
                    }
                    t -= 1;
                    idx[t] += 1;
                    if idx[t] < m {
                        break;
                    }
                    idx[t] = 0;
                }
            }
        }
        Sampling::MonteCarlo { n_points, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok((0..n_points)
                .map(|_| (0..k).map(|_| Coord { num: rng.next_u64() >> 11, den: 1 << 53 }).collect())
                .collect())
        }
    }
}

/// A qualifying `q` with `ψ(q)` enclosed in units of `2^-64`.
struct Entry {
    q: u64,
    lo: u128,
    hi: u128,
    thr: Threshold,
}

fn entries(x: &RealVector, psi: &ApproxFunction, q0: u64, q_max: u64) -> Result<Vec<Entry>> {
    let point = ScanPoint::new(x)?;
    qualifying_q(&point, psi, q0, q_max)?
        .into_iter()
        .map(|q| {
            let thr = psi.threshold_at(q)?;
            let f = thr.fixed();
            Ok(Entry { q, lo: f.lo >> 64, hi: f.hi.div_ceil(1 << 64), thr })
        })
        .collect()
}

/// `‖q·y‖ < ψ(q)` for every coordinate; `None` when undecidable.
fn coords_below(e: &Entry, y: &[Coord]) -> Option<bool> {
    for c in y {
        let den = c.den as u128;
        let r = ((e.q as u128 % den) * c.num as u128) % den;
        let m = r.min(den - r);
        let d_floor = (m << 64) / den;
        if d_floor + 1 <= e.lo {
            continue;
        }
        if d_floor >= e.hi {
            return Some(false);
        }
        let dist = Surd::from_rational(BigRational::new(BigInt::from(m), BigInt::from(den)));
        match e.thr.exceeds(&dist) {
            Ok(true) => {}
            Ok(false) => return Some(false),
            Err(_) => return None,
        }
    }
    Some(true)
}

fn scan_point(list: &[Entry], y: Vec<Coord>, q_cap: u64) -> PointResult {
    let mut witness_count = 0;
    let mut first_witness = None;
    let mut undecided = 0;
    for e in list.iter().take_while(|e| e.q <= q_cap) {
        match coords_below(e, &y) {
            Some(true) => {
                witness_count += 1;
                first_witness.get_or_insert(e.q);
            }
            Some(false) => {}
            None => undecided += 1,
        }
    }
    PointResult { y, witness_count, first_witness, undecided }
}

fn summarize(q0: u64, q_max: u64, sampling: Sampling, qualifying: usize, points: Vec<PointResult>) -> FractionReport {
    let n = points.len() as u64;
    let witnessed = points.iter().filter(|p| p.witness_count > 0).count() as u64;
    let undecided_points = points.iter().filter(|p| p.undecided > 0).count() as u64;
    let fraction = if n == 0 { BigRational::zero() } else { BigRational::new(witnessed.into(), n.into()) };
    let p = fraction.to_f64().unwrap_or(0.0);
    let sigma = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
    FractionReport { q0, q_max, sampling, n_points: n, witnessed, fraction, sigma, qualifying, undecided_points, points }
}

fn validate(exp: &MeasureExperiment) -> Result<()> {
    if exp.q_max == 0 {
        return Err(Error::InvalidInput("Q_max must be at least 1".into()));
    }
    if exp.q0 > exp.q_max {
        return Err(Error::InvalidInput(format!("Q0 = {} exceeds Q_max = {}", exp.q0, exp.q_max)));
    }
    Ok(())
}

/// Fraction of samples `y` with some `q ∈ (Q0, Q_max]` satisfying `‖q(x, y)‖ < ψ(q)`.
pub fn approximable_fraction(exp: &MeasureExperiment) -> Result<FractionReport> {
    Ok(approximable_profile(exp, &[exp.q_max])?.remove(0))
}

/// The same fraction at each cutoff in `q_maxes`, sharing one scan.
pub fn approximable_profile(exp: &MeasureExperiment, q_maxes: &[u64]) -> Result<Vec<FractionReport>> {
    validate(exp)?;
    let top = q_maxes.iter().copied().max().ok_or_else(|| Error::InvalidInput("no Q_max given".into()))?;
    if q_maxes.iter().any(|&q| q < exp.q0 || q == 0) {
        return Err(Error::InvalidInput("every Q_max must be at least max(Q0, 1)".into()));
    }
    let list = entries(&exp.x, &exp.psi, exp.q0, top)?;
    let ys = samples(&exp.sampling, exp.k)?;
    Ok(q_maxes
        .iter()
        .map(|&qm| {
            let count = list.iter().take_while(|e| e.q <= qm).count();
            let points: Vec<PointResult> = ys.par_iter().map(|y| scan_point(&list, y.clone(), qm)).collect();
            summarize(exp.q0, qm, exp.sampling, count, points)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiContrast {
    pub report: FractionReport,
    /// `Σ 2φ(q)(q+1)/q` over qualifying `q ∈ (Q0, Q_max]`.
    pub union_bound: SeriesSum,
    /// `fraction ≤ union_bound + 3σ`.
    pub within_bound: bool,
}

/// The convergent contrast `φ(q) = (q log²q)^{−1/d}` on the line `{x} × ℝ`.
pub fn phi_contrast(x: &RealVector, d: u32, q0: u64, q_max: u64, sampling: Sampling) -> Result<PhiContrast> {
    if q0 < 2 {
        return Err(Error::InvalidInput("Q0 must be at least 2".into()));
    }
    if x.dim() as u32 + 1 != d {
        return Err(Error::InvalidInput(format!("x has dimension {} but d = {d}", x.dim())));
    }
    let phi = ApproxFunction::phi(d)?;
    let exp = MeasureExperiment { x: x.clone(), psi: phi.clone(), k: 1, q0, q_max, sampling };
    validate(&exp)?;
    let list = entries(x, &phi, q0, q_max)?;
    let mut union_bound = SeriesSum::zero();
    for e in &list {
        let w = BigRational::new(BigInt::from(2 * (e.q + 1)), BigInt::from(e.q));
        union_bound = union_bound.add_threshold(&e.thr.scale(&w));
    }
    let ys = samples(&sampling, 1)?;
    let points: Vec<PointResult> = ys.par_iter().map(|y| scan_point(&list, y.clone(), q_max)).collect();
    let report = summarize(q0, q_max, sampling, list.len(), points);
    let within_bound = report.fraction_f64() <= union_bound.enclosure.hi + 3.0 * report.sigma;
    Ok(PhiContrast { report, union_bound, within_bound })
}

/// `approximable_fraction` on `[0,1]^k`, `k ≥ 2`, with the partial sums of
/// `Σ_{‖qx‖<ψ(q)} ψ(q)^k` over the same range.
pub fn subspace_fraction(exp: &MeasureExperiment) -> Result<(FractionReport, Vec<(u64, SeriesSum)>)> {
    if exp.k < 2 {
        return Err(Error::InvalidInput("subspace probes need k ≥ 2".into()));
    }
    let report = approximable_fraction(exp)?;
    let series = partial_series(&exp.x, &exp.psi, exp.k, exp.q_max)?;
    Ok((report, series))
}

/// Per-sample audit of: ψ̄-witnessed and not φ-witnessed implies ψ-witnessed.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub n_points: u64,
    pub psibar_witnessed: u64,
    pub phi_witnessed: u64,
    pub psi_witnessed: u64,
    /// Samples that are ψ̄- but neither φ- nor ψ-witnessed.
    pub violations: Vec<usize>,
    pub undecided_points: u64,
}

pub fn psibar_decomposition(exp: &MeasureExperiment) -> Result<DecompositionCheck> {
    validate(exp)?;
    let phi = ApproxFunction::phi(exp.d())?;
    let bar = ApproxFunction::max(exp.psi.clone(), phi.clone());
    let ys = samples(&exp.sampling, exp.k)?;
    let run = |f: &ApproxFunction| -> Result<Vec<PointResult>> {
        let list = entries(&exp.x, f, exp.q0, exp.q_max)?;
        Ok(ys.par_iter().map(|y| scan_point(&list, y.clone(), exp.q_max)).collect())
    };
    let (b, p, s) = (run(&bar)?, run(&phi)?, run(&exp.psi)?);
    let hit = |r: &PointResult| r.witness_count > 0;
    let violations = (0..ys.len()).filter(|&i| hit(&b[i]) && !hit(&p[i]) && !hit(&s[i])).collect();
    let undecided_points =
        (0..ys.len()).filter(|&i| b[i].undecided + p[i].undecided + s[i].undecided > 0).count() as u64;
    Ok(DecompositionCheck {
        n_points: ys.len() as u64,
        psibar_witnessed: b.iter().filter(|r| hit(r)).count() as u64,
        phi_witnessed: p.iter().filter(|r| hit(r)).count() as u64,
        psi_witnessed: s.iter().filter(|r| hit(r)).count() as u64,
        violations,
        undecided_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_excludes_endpoints() {
        let s = samples(&Sampling::Grid { n_points: 4 }, 2).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], vec![Coord { num: 1, den: 3 }, Coord { num: 1, den: 3 }]);
        assert_eq!(s[3], vec![Coord { num: 2, den: 3 }, Coord { num: 2, den: 3 }]);
        assert!(samples(&Sampling::Grid { n_points: 5 }, 2).is_err());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let a = samples(&Sampling::MonteCarlo { n_points: 3, seed: 7 }, 1).unwrap();
        let b = samples(&Sampling::MonteCarlo { n_points: 3, seed: 7 }, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|y| y[0].num < (1 << 53)));
    }
}
