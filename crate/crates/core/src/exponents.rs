//! Finite-height estimates of the dual type `τ_D`, the exponents `ω_D` and
//! `ω_S`, Khintchine's transference inequalities and VWA witnesses.
//!
//! Heights are grouped into dyadic blocks `2^{b−1} < h ≤ 2^b`. Each block
//! reports the largest exponent achieved inside it, and the estimate
//! aggregates the block maxima over a top window of blocks. An exact zero
//! `‖⟨n, x⟩‖ = 0` (or `‖qx‖ = 0`) is detected with exact arithmetic and
//! reported as an infinite exponent.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::approx::ApproxFunction;
use crate::counting::{blocks, qualifying_q};
use crate::error::{Error, Result};
use crate::real::kernel::{DistEnc, FracEnc, LinearForm, ScanPoint};
use crate::real::RealVector;

/// An exponent value; `+∞` sorts above every finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExpValue {
    Finite(f64),
    Infinite,
}

impl ExpValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExpValue::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExpValue::Finite(v) => Some(*v),
            ExpValue::Infinite => None,
        }
    }

    pub fn total_cmp(&self, o: &ExpValue) -> Ordering {
        match (self, o) {
            (ExpValue::Infinite, ExpValue::Infinite) => Ordering::Equal,
            (ExpValue::Infinite, _) => Ordering::Greater,
            (_, ExpValue::Infinite) => Ordering::Less,
            (ExpValue::Finite(a), ExpValue::Finite(b)) => a.total_cmp(b),
        }
    }

    pub fn max(self, o: ExpValue) -> ExpValue {
        if o.total_cmp(&self) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    /// `self + c`, with `∞ + c = ∞`.
    pub fn shift(self, c: f64) -> ExpValue {
        match self {
            ExpValue::Finite(v) => ExpValue::Finite(v + c),
            ExpValue::Infinite => ExpValue::Infinite,
        }
    }

    /// `max(self, 0)`: the exponents are nonnegative by Dirichlet's theorem.
    pub fn clamp_nonnegative(self) -> ExpValue {
        match self {
            ExpValue::Finite(v) if v < 0.0 => ExpValue::Finite(0.0),
            other => other,
        }
    }
}

impl PartialOrd for ExpValue {
    fn partial_cmp(&self, o: &ExpValue) -> Option<Ordering> {
        Some(self.total_cmp(o))
    }
}

impl fmt::Display for ExpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpValue::Finite(v) => write!(f, "{v}"),
            ExpValue::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for ExpValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(ExpValue::Infinite),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ExpValue::Finite)
                .ok_or_else(|| Error::Parse(format!("'{s}' is not an exponent (a number or inf)"))),
        }
    }
}

impl Serialize for ExpValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    TauD,
    OmegaD,
    OmegaS,
}

impl fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentKind::TauD => "tau_D",
            ExponentKind::OmegaD => "omega_D",
            ExponentKind::OmegaS => "omega_S",
        })
    }
}

/// How block maxima are combined into one estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Aggregation {
    /// Maximum over the top `fraction` of the blocks.
    TopFraction(f64),
    /// Least-squares slope of `−ln(block minimum distance)` against
    /// `ln(height of the minimiser)` over the top half of the blocks,
    /// mapped to the exponent scale. A diagnostic, not a lower bound.
    EnvelopeSlope,
}

impl Default for Aggregation {
    fn default() -> Self {
        Aggregation::TopFraction(0.5)
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregation::TopFraction(v) => write!(f, "top:{v}"),
            Aggregation::EnvelopeSlope => write!(f, "slope"),
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "slope" {
            return Ok(Aggregation::EnvelopeSlope);
        }
        if s == "top-half" {
            return Ok(Aggregation::TopFraction(0.5));
        }
        if let Some(v) = s.strip_prefix("top:") {
            if let Ok(v) = v.parse::<f64>() {
                if v > 0.0 && v <= 1.0 {
                    return Ok(Aggregation::TopFraction(v));
                }
            }
        }
        Err(Error::Parse(format!("bad aggregation '{s}': expected top:F with 0 < F ≤ 1, top-half, or slope")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentConfig {
    pub aggregation: Aggregation,
    /// Largest number of integer vectors enumerated by brute force.
    pub max_cells: u64,
    /// Half-width of the boundary band `|τ̂_D − (ℓ+1)| ≤ band`.
    pub boundary_band: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig { aggregation: Aggregation::default(), max_cells: 100_000_000, boundary_band: 0.1 }
    }
}

/// The largest exponent inside one dyadic block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockMax {
    pub b: u32,
    /// Heights `lo < h ≤ hi`.
    pub lo: u64,
    pub hi: u64,
    pub value: ExpValue,
    pub witness: Vec<i64>,
    /// Smallest distance in the block and a minimiser.
    #[serde(skip)]
    pub min_dist: f64,
    #[serde(skip)]
    pub min_witness: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Below,
    Boundary,
    Above,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub kind: ExponentKind,
    pub value: ExpValue,
    /// Requested height (or `Q_max`).
    pub height: u64,
    /// Height actually enumerated after budget degradation.
    pub effective_height: u64,
    pub blocks: Vec<BlockMax>,
    /// `(vector or q, exponent)`, strongest first.
    pub best_witnesses: Vec<(Vec<i64>, ExpValue)>,
    pub is_exact_resonance: bool,
    pub aggregation: Aggregation,
    pub warnings: Vec<String>,
    /// Position of `τ̂_D` relative to `ℓ + 1`, for dual estimates.
    pub regime: Option<Regime>,
}

impl ExponentEstimate {
    /// True when the last block maximum exceeds the one before it.
    pub fn still_increasing(&self) -> bool {
        let n = self.blocks.len();
        n >= 2 && self.blocks[n - 1].value.total_cmp(&self.blocks[n - 2].value) == Ordering::Greater
    }
}

/// Number of dyadic blocks covering heights `2..=h`: the least `B` with `h ≤ 2^B`.
fn block_count(h: u64) -> u32 {
    64 - (h - 1).leading_zeros()
}

fn block_range(b: u32, h: u64) -> (u64, u64) {
    (1u64 << (b - 1), (1u64 << b).min(h))
}

fn exponent(dist: f64, height: u64) -> f64 {
    -dist.ln() / (height as f64).ln()
}

fn enc_to_f64(d: &DistEnc) -> f64 {
    let (lo, hi) = d.to_f64();
    0.5 * (lo + hi)
}

/// Fixed-point units below which a distance is checked for an exact zero.
const ZERO_GUARD: u128 = 1 << 24;

/// Per-block scan result before aggregation.
#[derive(Clone, Debug)]
struct Acc {
    best: f64,
    witness: Vec<i64>,
    min_dist: f64,
    min_witness: Vec<i64>,
}

impl Acc {
    fn empty() -> Self {
        Acc { best: f64::NEG_INFINITY, witness: Vec::new(), min_dist: f64::INFINITY, min_witness: Vec::new() }
    }

    fn offer(&mut self, n: &[i64], d: f64, e: f64) {
        if e > self.best {
            self.best = e;
            self.witness = n.to_vec();
        }
        if d < self.min_dist {
            self.min_dist = d;
            self.min_witness = n.to_vec();
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        if o.best > self.best {
            self.best = o.best;
            self.witness = o.witness;
        }
        if o.min_dist < self.min_dist {
            self.min_dist = o.min_dist;
            self.min_witness = o.min_witness;
        }
        self
    }
}

enum BlockOutcome {
    Done(Acc),
    Resonance(Vec<i64>),
}

fn finish(
    kind: ExponentKind,
    height: u64,
    effective_height: u64,
    mut blocks: Vec<BlockMax>,
    resonance: Option<Vec<i64>>,
    cfg: &ExponentConfig,
    warnings: Vec<String>,
    scale: impl Fn(f64) -> f64,
) -> ExponentEstimate {
    for b in &mut blocks {
        if let ExpValue::Finite(v) = b.value {
            b.value = ExpValue::Finite(scale(v));
        }
    }
    if let Some(w) = resonance {
        return ExponentEstimate {
            kind,
            value: ExpValue::Infinite,
            height,
            effective_height,
            blocks,
            best_witnesses: vec![(w, ExpValue::Infinite)],
            is_exact_resonance: true,
            aggregation: cfg.aggregation,
            warnings,
            regime: None,
        };
    }
    let total = blocks.len();
    let window_start = match cfg.aggregation {
        Aggregation::TopFraction(f) => total - ((total as f64 * f).ceil() as usize).clamp(1, total.max(1)),
        Aggregation::EnvelopeSlope => total - total.div_ceil(2).max(1).min(total),
    };
    let window = &blocks[window_start.min(total)..];
    let value = match cfg.aggregation {
        Aggregation::TopFraction(_) => window.iter().fold(ExpValue::Finite(f64::NEG_INFINITY), |m, b| m.max(b.value)),
        Aggregation::EnvelopeSlope => {
            let pts: Vec<(f64, f64)> = window
                .iter()
                .filter(|b| b.min_dist > 0.0 && !b.min_witness.is_empty())
                .map(|b| {
                    let h = b.min_witness.iter().map(|v| v.unsigned_abs()).max().unwrap_or(1) as f64;
                    (h.ln(), -b.min_dist.ln())
                })
                .collect();
            ExpValue::Finite(scale(least_squares_slope(&pts)))
        }
    };
    let mut best: Vec<(Vec<i64>, ExpValue)> = window.iter().map(|b| (b.witness.clone(), b.value)).collect();
    best.sort_by(|a, b| b.1.total_cmp(&a.1));
    ExponentEstimate {
        kind,
        value,
        height,
        effective_height,
        blocks,
        best_witnesses: best,
        is_exact_resonance: false,
        aggregation: cfg.aggregation,
        warnings,
        regime: None,
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn regime_for(value: ExpValue, ell: usize, band: f64) -> Regime {
    let target = ell as f64 + 1.0;
    match value {
        ExpValue::Infinite => Regime::Above,
        ExpValue::Finite(v) if (v - target).abs() <= band => Regime::Boundary,
        ExpValue::Finite(v) if v < target => Regime::Below,
        ExpValue::Finite(_) => Regime::Above,
    }
}

/// `τ_D ≥ ℓ` and `ω_S ≥ 0` for every point (Dirichlet); a regression slope can dip below.
fn dirichlet_floor(est: &mut ExponentEstimate, ell: usize) {
    if let ExpValue::Finite(v) = est.value {
        if est.aggregation == Aggregation::EnvelopeSlope && v < ell as f64 {
            est.warnings.push(format!("slope {v} below the Dirichlet minimum {ell}; raised to {ell}"));
            est.value = ExpValue::Finite(ell as f64);
        }
    }
}

/// Estimate of `τ_D(x) = sup{τ : ‖⟨n, x⟩‖ < |n|^{−τ} for infinitely many n}` from `|n|_∞ ≤ H`.
pub fn estimate_tau_d(x: &RealVector, h: u64, cfg: &ExponentConfig) -> Result<ExponentEstimate> {
    if h < 2 {
        return Err(Error::InvalidInput("H must be at least 2".into()));
    }
    let form = LinearForm::new(x)?;
    let ell = x.dim();
    let mut warnings = Vec::new();
    let mut eff = h;
    if ell >= 3 {
        let cells = (2.0 * h as f64 + 1.0).powi(ell as i32);
        if cells > cfg.max_cells as f64 {
            eff = (((cfg.max_cells as f64).powf(1.0 / ell as f64) - 1.0) / 2.0).floor().max(2.0) as u64;
            warnings.push(format!("enumeration of (2H+1)^{ell} vectors exceeds the budget of {}; H degraded from {h} to {eff}", cfg.max_cells));
        }
    }
    let (blocks, resonance) = match ell {
        1 => scan_dual_1(&form, eff)?,
        2 => scan_dual_2(&form, eff)?,
        _ => scan_dual_brute(&form, eff)?,
    };
    let mut est = finish(ExponentKind::TauD, h, eff, blocks, resonance, cfg, warnings, |v| v);
    dirichlet_floor(&mut est, ell);
    est.regime = Some(regime_for(est.value, ell, cfg.boundary_band));
    Ok(est)
}

/// Brute-force variant of [`estimate_tau_d`] for every dimension; the reference for the fast scans.
pub fn estimate_tau_d_brute(x: &RealVector, h: u64, cfg: &ExponentConfig) -> Result<ExponentEstimate> {
    if h < 2 {
        return Err(Error::InvalidInput("H must be at least 2".into()));
    }
    let form = LinearForm::new(x)?;
    let (blocks, resonance) = scan_dual_brute(&form, h)?;
    let mut est = finish(ExponentKind::TauD, h, h, blocks, resonance, cfg, Vec::new(), |v| v);
    dirichlet_floor(&mut est, x.dim());
    est.regime = Some(regime_for(est.value, x.dim(), cfg.boundary_band));
    Ok(est)
}

/// `ω_D = τ_D − ℓ`, from the same scan.
pub fn estimate_omega_d(x: &RealVector, h: u64, cfg: &ExponentConfig) -> Result<ExponentEstimate> {
    let tau = estimate_tau_d(x, h, cfg)?;
    Ok(omega_from_tau(&tau, x.dim()))
}

/// Shifts a `τ_D` estimate to the `ω_D` scale.
pub fn omega_from_tau(tau: &ExponentEstimate, ell: usize) -> ExponentEstimate {
    let shift = -(ell as f64);
    let mut est = tau.clone();
    est.kind = ExponentKind::OmegaD;
    est.value = tau.value.shift(shift);
    for b in &mut est.blocks {
        b.value = b.value.shift(shift);
    }
    for w in &mut est.best_witnesses {
        w.1 = w.1.shift(shift);
    }
    est
}

fn check_zero(form: &LinearForm, n: &[i64], enc: &FracEnc) -> Result<bool> {
    let d = enc.dist();
    if d.lo > ZERO_GUARD {
        return Ok(false);
    }
    Ok(form.exact(n)?.is_zero())
}

fn block_from(b: u32, lo: u64, hi: u64, acc: Acc) -> BlockMax {
    BlockMax {
        b,
        lo,
        hi,
        value: if acc.best.is_finite() { ExpValue::Finite(acc.best) } else { ExpValue::Finite(f64::NEG_INFINITY) },
        witness: acc.witness,
        min_dist: acc.min_dist,
        min_witness: acc.min_witness,
    }
}

type Scan = (Vec<BlockMax>, Option<Vec<i64>>);

fn scan_dual_1(form: &LinearForm, h: u64) -> Result<Scan> {
    if check_zero(form, &[1], &form.frac_enc(&[1]))? {
        return Ok((Vec::new(), Some(vec![1])));
    }
    let mut out = Vec::new();
    for b in 1..=block_count(h) {
        let (lo, hi) = block_range(b, h);
        let parts: Vec<Result<BlockOutcome>> = blocks(lo, hi)
            .into_par_iter()
            .map(|(a, c)| {
                let mut acc = Acc::empty();
                for n in a + 1..=c {
                    let v = [n as i64];
                    let enc = form.frac_enc(&v);
                    if check_zero(form, &v, &enc)? {
                        return Ok(BlockOutcome::Resonance(v.to_vec()));
                    }
                    let d = enc_to_f64(&enc.dist());
                    acc.offer(&v, d, exponent(d, n));
                }
                Ok(BlockOutcome::Done(acc))
            })
            .collect();
        let mut acc = Acc::empty();
        for p in parts {
            match p? {
                BlockOutcome::Resonance(w) => return Ok((out, Some(w))),
                BlockOutcome::Done(a) => acc = acc.merge(a),
            }
        }
        out.push(block_from(b, lo, hi, acc));
    }
    Ok((out, None))
}

/// Visits every `n ∈ [−u, u]^ℓ` with `|n|_∞ > lo`.
fn for_each_shell(ell: usize, lo: i64, u: i64, mut f: impl FnMut(&[i64]) -> Result<bool>) -> Result<bool> {
    let mut n = vec![-u; ell];
    loop {
        if n.iter().any(|v| v.abs() > lo) && f(&n)? {
            return Ok(true);
        }
        let mut i = 0;
        loop {
            if i == ell {
                return Ok(false);
            }
            if n[i] < u {
                n[i] += 1;
                break;
            }
            n[i] = -u;
            i += 1;
        }
    }
}

fn scan_dual_brute(form: &LinearForm, h: u64) -> Result<Scan> {
    let ell = form.dim();
    let (_, res) = height_one_resonance(form)?;
    if res.is_some() {
        return Ok((Vec::new(), res));
    }
    let mut out = Vec::new();
    for b in 1..=block_count(h) {
        let (lo, hi) = block_range(b, h);
        let mut acc = Acc::empty();
        let mut hit = None;
        for_each_shell(ell, lo as i64, hi as i64, |n| {
            let enc = form.frac_enc(n);
            if check_zero(form, n, &enc)? {
                hit = Some(n.to_vec());
                return Ok(true);
            }
            let d = enc_to_f64(&enc.dist());
            let height = n.iter().map(|v| v.unsigned_abs()).max().unwrap();
            acc.offer(n, d, exponent(d, height));
            Ok(false)
        })?;
        if hit.is_some() {
            return Ok((out, hit));
        }
        out.push(block_from(b, lo, hi, acc));
    }
    Ok((out, None))
}

fn circ(a: u128, b: u128) -> u128 {
    let d = a.wrapping_sub(b);
    d.min(d.wrapping_neg())
}

/// Sorted `(frac(n₁x₁), n₁)` for the given multipliers.
fn sorted_fracs(form: &LinearForm, ns: impl Iterator<Item = i64>) -> Vec<(u128, i64)> {
    let f = form.fixed(0);
    let mut v: Vec<(u128, i64)> = ns.map(|n| (f.times(n).lo, n)).collect();
    v.sort_unstable();
    v
}

/// Elements of a sorted circular list within `eps` of `t`, each visited once.
fn within(list: &[(u128, i64)], t: u128, eps: u128, mut f: impl FnMut(i64) -> Result<()>) -> Result<()> {
    let len = list.len();
    let start = list.partition_point(|e| e.0 < t);
    let mut seen = 0;
    while seen < len {
        let e = list[(start + seen) % len];
        if circ(e.0, t) > eps {
            break;
        }
        f(e.1)?;
        seen += 1;
    }
    let mut back = 1;
    while seen + back <= len {
        let e = list[(start + len - back) % len];
        if circ(e.0, t) > eps {
            break;
        }
        f(e.1)?;
        back += 1;
    }
    Ok(())
}

/// Two-pass exact block maxima for `ℓ = 2`.
///
/// For each `n₂`, the nearest `frac(n₁x₁)` to `frac(−n₂x₂)` gives a lower
/// bound `e*` on the block maximum. Any `n` in the block beating `e*` has
/// distance below `lo^{−e*}`, so a second pass over those windows finds the
/// exact maximum.
fn scan_dual_2(form: &LinearForm, h: u64) -> Result<Scan> {
    let (_, r) = height_one_resonance(form)?;
    if r.is_some() {
        return Ok((Vec::new(), r));
    }
    let fx2 = *form.fixed(1);
    let mut out = Vec::new();
    for b in 1..=block_count(h) {
        let (lo, hi) = block_range(b, h);
        let (lo_i, hi_i) = (lo as i64, hi as i64);
        let all = sorted_fracs(form, -hi_i..=hi_i);
        let outer = sorted_fracs(form, (-hi_i..=hi_i).filter(|n| n.abs() > lo_i));
        let eval = |n1: i64, n2: i64| -> Result<std::result::Result<(f64, f64), Vec<i64>>> {
            let v = [n1, n2];
            let enc = form.frac_enc(&v);
            if check_zero(form, &v, &enc)? {
                return Ok(Err(v.to_vec()));
            }
            let d = enc_to_f64(&enc.dist());
            let height = n1.unsigned_abs().max(n2.unsigned_abs());
            Ok(Ok((d, exponent(d, height))))
        };
        let n2s: Vec<i64> = (-hi_i..=hi_i).collect();
        let list_for = |n2: i64| if n2.abs() > lo_i { &all } else { &outer };
        // pass 1: nearest neighbours
        let pass1: Vec<Result<std::result::Result<Acc, Vec<i64>>>> = n2s
            .par_chunks(4096)
            .map(|chunk| {
                let mut acc = Acc::empty();
                for &n2 in chunk {
                    let list = list_for(n2);
                    if list.is_empty() {
                        continue;
                    }
                    let t = fx2.times(n2).lo.wrapping_neg();
                    let len = list.len();
                    let i = list.partition_point(|e| e.0 < t);
                    for j in [i % len, (i + len - 1) % len] {
                        let n1 = list[j].1;
                        match eval(n1, n2)? {
                            Err(w) => return Ok(Err(w)),
                            Ok((d, e)) => acc.offer(&[n1, n2], d, e),
                        }
                    }
                }
                Ok(Ok(acc))
            })
            .collect();
        let mut acc = Acc::empty();
        for p in pass1 {
            match p? {
                Err(w) => return Ok((out, Some(w))),
                Ok(a) => acc = acc.merge(a),
            }
        }
        // pass 2: every n with distance ≤ lo^{-e*}
        let e_star = acc.best;
        let eps_real = (lo as f64).powf(-e_star);
        let eps = if eps_real >= 0.5 { u128::MAX } else { (eps_real * 2f64.powi(128) * (1.0 + 1e-9)) as u128 + ZERO_GUARD };
        let pass2: Vec<Result<Acc>> = n2s
            .par_chunks(4096)
            .map(|chunk| {
                let mut acc = Acc::empty();
                for &n2 in chunk {
                    let t = fx2.times(n2).lo.wrapping_neg();
                    within(list_for(n2), t, eps, |n1| {
                        if let Ok((d, e)) = eval(n1, n2)? {
                            acc.offer(&[n1, n2], d, e);
                        }
                        Ok(())
                    })?;
                }
                Ok(acc)
            })
            .collect();
        for p in pass2 {
            acc = acc.merge(p?);
        }
        out.push(block_from(b, lo, hi, acc));
    }
    Ok((out, None))
}

/// Height-one vectors only matter through exact zeros (their exponent has `ln 1 = 0`).
fn height_one_resonance(form: &LinearForm) -> Result<Scan> {
    let mut res = None;
    for_each_shell(form.dim(), 0, 1, |n| {
        if check_zero(form, n, &form.frac_enc(n))? {
            res = Some(n.to_vec());
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok((Vec::new(), res))
}

/// Estimate of `ω_S(x) = sup{ω : ‖qx‖ ≤ q^{−(1+ω)/d} for infinitely many q}` from `q ≤ Q_max`.
pub fn estimate_omega_s(x_full: &RealVector, q_max: u64, cfg: &ExponentConfig) -> Result<ExponentEstimate> {
    if q_max < 2 {
        return Err(Error::InvalidInput("Q_max must be at least 2".into()));
    }
    let point = ScanPoint::new(x_full)?;
    let d = x_full.dim() as f64;
    if point.exact_dist(1)?.is_zero() {
        let est = finish(ExponentKind::OmegaS, q_max, q_max, Vec::new(), Some(vec![1]), cfg, Vec::new(), |v| v);
        return Ok(est);
    }
    let mut out = Vec::new();
    let mut resonance = None;
    'outer: for b in 1..=block_count(q_max) {
        let (lo, hi) = block_range(b, q_max);
        let parts: Vec<Result<BlockOutcome>> = blocks(lo, hi)
            .into_par_iter()
            .map(|(a, c)| {
                let mut acc = Acc::empty();
                for q in a + 1..=c {
                    let enc = point.dist_enc(q as i64);
                    if enc.lo <= ZERO_GUARD && point.exact_dist(q as i64)?.is_zero() {
                        return Ok(BlockOutcome::Resonance(vec![q as i64]));
                    }
                    let dist = enc_to_f64(&enc);
                    acc.offer(&[q as i64], dist, exponent(dist, q));
                }
                Ok(BlockOutcome::Done(acc))
            })
            .collect();
        let mut acc = Acc::empty();
        for p in parts {
            match p? {
                BlockOutcome::Resonance(w) => {
                    resonance = Some(w);
                    break 'outer;
                }
                BlockOutcome::Done(a) => acc = acc.merge(a),
            }
        }
        out.push(block_from(b, lo, hi, acc));
    }
    let mut est = finish(ExponentKind::OmegaS, q_max, q_max, out, resonance, cfg, Vec::new(), |v| d * v - 1.0);
    dirichlet_floor(&mut est, 0);
    Ok(est)
}

/// Outcome of the transference sandwich `ω_D/(d² + (d−1)ω_D) ≤ ω_S ≤ ω_D`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferenceCheck {
    pub pass: bool,
    pub lower: ExpValue,
    pub upper: ExpValue,
    pub omega_d: ExpValue,
    pub omega_s: ExpValue,
    pub d: u32,
    pub slack: f64,
}

pub fn check_transference(omega_d: ExpValue, omega_s: ExpValue, d: u32, slack: f64) -> Result<TransferenceCheck> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be at least 1".into()));
    }
    for v in [omega_d, omega_s] {
        if matches!(v, ExpValue::Finite(x) if x < 0.0 || x.is_nan()) {
            return Err(Error::InvalidInput(format!("exponents must be nonnegative, got {v}")));
        }
    }
    if slack < 0.0 {
        return Err(Error::InvalidInput("slack must be nonnegative".into()));
    }
    let df = d as f64;
    let lower = match omega_d {
        ExpValue::Infinite if d == 1 => ExpValue::Infinite,
        ExpValue::Infinite => ExpValue::Finite(1.0 / (df - 1.0)),
        ExpValue::Finite(w) => ExpValue::Finite(w / (df * df + (df - 1.0) * w)),
    };
    let upper = omega_d;
    let lower_ok = match (lower, omega_s) {
        (_, ExpValue::Infinite) => true,
        (ExpValue::Infinite, ExpValue::Finite(_)) => false,
        (ExpValue::Finite(l), ExpValue::Finite(s)) => s >= l - slack,
    };
    let upper_ok = match (upper, omega_s) {
        (ExpValue::Infinite, _) => true,
        (ExpValue::Finite(_), ExpValue::Infinite) => false,
        (ExpValue::Finite(u), ExpValue::Finite(s)) => s <= u + slack,
    };
    Ok(TransferenceCheck { pass: lower_ok && upper_ok, lower, upper, omega_d, omega_s, d, slack })
}

/// All `q ≤ Q_max` with `‖q·x‖ < q^{−1/d−ε}`, increasing.
pub fn vwa_witnesses(x_full: &RealVector, epsilon: &BigRational, q_max: u64) -> Result<Vec<u64>> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let d = BigInt::from(x_full.dim() as u64);
    let a = BigRational::new(BigInt::one(), d) + epsilon;
    let psi = ApproxFunction::power(a)?;
    qualifying_q(&ScanPoint::new(x_full)?, &psi, 0, q_max)
}

/// `τ̂_D((x, y)) ≥ τ̂_D(x)` at a common height, as exposed by embedding `n ↦ (n, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionCheck {
    pub base: ExpValue,
    pub extended: ExpValue,
    pub holds: bool,
}

pub fn check_extension_monotonicity(x: &RealVector, y: &RealVector, h: u64, cfg: &ExponentConfig) -> Result<ExtensionCheck> {
    let base = estimate_tau_d(x, h, cfg)?.value;
    let extended = estimate_tau_d(&x.extend(y), h, cfg)?.value;
    Ok(ExtensionCheck { base, extended, holds: extended.total_cmp(&base) != Ordering::Less })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> RealVector {
        s.parse().unwrap()
    }

    #[test]
    fn block_layout() {
        assert_eq!(block_count(2), 1);
        assert_eq!(block_count(3), 2);
        assert_eq!(block_count(4), 2);
        assert_eq!(block_count(100_000), 17);
        assert_eq!(block_range(17, 100_000), (65_536, 100_000));
    }

    #[test]
    fn half_resonates_at_two() {
        let e = estimate_tau_d(&v("1/2"), 100, &ExponentConfig::default()).unwrap();
        assert!(e.is_exact_resonance);
        assert_eq!(e.value, ExpValue::Infinite);
        assert_eq!(e.best_witnesses[0].0, vec![2]);
    }

    #[test]
    fn infinity_orders_last() {
        assert!(ExpValue::Infinite > ExpValue::Finite(1e300));
        assert_eq!(ExpValue::Finite(1.0).max(ExpValue::Infinite), ExpValue::Infinite);
        assert_eq!("inf".parse::<ExpValue>().unwrap(), ExpValue::Infinite);
    }

    #[test]
    fn transference_conventions() {
        let c = check_transference(ExpValue::Finite(0.7), ExpValue::Finite(0.7), 1, 0.0).unwrap();
        assert!(c.pass);
        assert!(!check_transference(ExpValue::Finite(0.7), ExpValue::Finite(0.6), 1, 0.0).unwrap().pass);
        assert!(check_transference(ExpValue::Finite(0.0), ExpValue::Finite(0.0), 3, 0.0).unwrap().pass);
        assert!(!check_transference(ExpValue::Finite(0.0), ExpValue::Finite(0.1), 3, 0.0).unwrap().pass);
        assert!(check_transference(ExpValue::Infinite, ExpValue::Finite(0.96), 2, 0.05).unwrap().pass);
        assert!(!check_transference(ExpValue::Infinite, ExpValue::Finite(0.9), 2, 0.05).unwrap().pass);
        assert!(check_transference(ExpValue::Finite(-0.1), ExpValue::Finite(0.0), 2, 0.0).is_err());
    }
}
