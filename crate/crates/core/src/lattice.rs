//! The lattice `Λ = g_t·u_x·ℤ^{ℓ+1}` and its sup-norm point counts.
//!
//! With `t = ln(N/δ)/(1 + 1/ℓ)` and `R = e^{t/ℓ}δ = e^{−t}N`, a point
//! `g_t u_x (m, q)` lies in the open ball `|r|_∞ < R` exactly when
//! `|q| < N` and `|m − q·x|_∞ < δ`. Counting therefore reduces to a scan over
//! `q`, and the dual lattice step to a search for `(q, p)` with `|q|_∞` and
//! `|⟨q, x⟩ + p|` both small.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive};

use crate::counting::{count_q, CountQuery, Delta};
use crate::error::{Error, Result};
use crate::real::ball::Ball;
use crate::real::kernel::LinearForm;
use crate::real::{CertifiedValue, RealVector, Surd, Threshold};

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub x: RealVector,
    pub n: u64,
    pub delta: BigRational,
    pub t: CertifiedValue,
    /// `R` from `e^{t/ℓ}·δ`.
    pub r: CertifiedValue,
    /// `R` from `e^{−t}·N`.
    pub r_alt: CertifiedValue,
    /// Enclosure of `det(g_t u_x)`.
    pub determinant: CertifiedValue,
}

fn ell_of(x: &RealVector) -> i64 {
    x.dim() as i64
}

fn t_ball(n: u64, delta: &BigRational, ell: i64, prec: u32) -> Ball {
    let ratio = BigRational::from_integer(BigInt::from(n)) / delta;
    let l = Ball::from_rational(&ratio, prec + 16).ln().expect("N/δ > 0");
    l.mul(&Ball::from_rational(&BigRational::new(BigInt::from(ell), BigInt::from(ell + 1)), prec + 16))
}

fn r_primary(n: u64, delta: &BigRational, ell: i64, prec: u32) -> Ball {
    let t = t_ball(n, delta, ell, prec);
    let e = t.mul(&Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(ell)), prec + 16)).exp().expect("moderate t");
    e.mul(&Ball::from_rational(delta, prec + 16))
}

fn r_secondary(n: u64, delta: &BigRational, ell: i64, prec: u32) -> Ball {
    let t = t_ball(n, delta, ell, prec);
    t.neg().exp().expect("moderate t").mul(&Ball::from_i64(n as i64, prec + 16))
}

/// `det g_t = (e^{t/ℓ})^ℓ·e^{−t}`; `u_x` is unipotent.
fn det_ball(n: u64, delta: &BigRational, ell: i64, prec: u32) -> Ball {
    let t = t_ball(n, delta, ell, prec);
    let a = t.mul(&Ball::from_rational(&BigRational::new(BigInt::one(), BigInt::from(ell)), prec + 16)).exp().expect("moderate t");
    let mut p = Ball::from_i64(1, prec + 16);
    for _ in 0..ell {
        p = p.mul(&a);
    }
    p.mul(&t.neg().exp().expect("moderate t"))
}

/// Builds the lattice data for `0 < δ < 1 ≤ N`.
pub fn build_lattice(x: &RealVector, n: u64, delta: &BigRational, precision_bits: u32) -> Result<LatticeSpec> {
    if !delta.is_positive() || delta >= &BigRational::one() {
        return Err(Error::InvalidInput(format!("δ must lie in (0, 1), got {delta}")));
    }
    if n == 0 || n > i64::MAX as u64 {
        return Err(Error::InvalidInput("N must satisfy 1 ≤ N < 2^63".into()));
    }
    let ell = ell_of(x);
    let bits = precision_bits;
    let t = CertifiedValue::from_balls(|p| Ok(t_ball(n, delta, ell, p)), bits, "t")?;
    let r = CertifiedValue::from_balls(|p| Ok(r_primary(n, delta, ell, p)), bits, "R")?;
    let r_alt = CertifiedValue::from_balls(|p| Ok(r_secondary(n, delta, ell, p)), bits, "R")?;
    if r.upper() < r_alt.lower() || r_alt.upper() < r.lower() {
        return Err(Error::InvalidInput("the two evaluations of R disagree".into()));
    }
    let determinant = CertifiedValue::from_balls(|p| Ok(det_ball(n, delta, ell, p)), bits, "det")?;
    Ok(LatticeSpec { x: x.clone(), n, delta: delta.clone(), t, r, r_alt, determinant })
}

impl LatticeSpec {
    pub fn ell(&self) -> usize {
        self.x.dim()
    }

    /// The determinant enclosure contains 1.
    pub fn is_unimodular(&self) -> bool {
        self.determinant.contains(&BigRational::one())
    }
}

/// Integers `m` with `|m − v| < δ`, for exact `v` and `0 < δ < 1`.
fn integers_near(v: &Surd, delta: &BigRational) -> Result<u64> {
    // m ∈ (v − δ, v + δ): ⌈v+δ⌉ − ⌊v−δ⌋ − 1 integers
    let hi = v.add_rational(delta);
    let lo = v.add_rational(&-delta);
    let hi_floor = hi.floor()?;
    let hi_ceil: BigInt = if hi.as_rational().is_some_and(|r| r.is_integer()) { hi_floor.clone() } else { &hi_floor + 1 };
    let lo_floor: BigInt = lo.floor()?;
    let n: BigInt = hi_ceil - lo_floor - 1;
    Ok(n.to_u64().unwrap_or(0))
}

/// `|{r ∈ Λ : |r|_∞ < R}|`, enumerated fiberwise: for each `|q| < N` the
/// `p` with `|qx_i − p_i| < δ` form a box whose size is counted exactly.
pub fn count_lattice_points(spec: &LatticeSpec) -> Result<u64> {
    let mut total: u64 = 0;
    for q in 0..spec.n {
        let mut prod: u64 = 1;
        for c in spec.x.iter() {
            let v = c.value().scale_int(&BigInt::from(q));
            prod *= integers_near(&v, &spec.delta)?;
            if prod == 0 {
                break;
            }
        }
        total += if q == 0 { prod } else { 2 * prod };
    }
    Ok(total)
}

/// A nonzero `(q, p) ∈ ℤ^ℓ × ℤ` in the dual system.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVector {
    pub q: Vec<i64>,
    pub p: i64,
    /// `|⟨q, x⟩ + p|`.
    pub residual: CertifiedValue,
    /// `|s|_∞` for the dual lattice point `s`: `max(|q|_∞·δ/R, |⟨q,x⟩+p|·N/R)`.
    pub sup_norm_image: CertifiedValue,
}

/// Searches `|q|_∞ ≤ c/δ`, `|⟨q, x⟩ + p| ≤ c/N` by increasing `|q|_∞`.
pub fn dual_short_vector(spec: &LatticeSpec, search_bound: &BigRational, max_cells: u64, precision_bits: u32) -> Result<Option<DualVector>> {
    if !search_bound.is_positive() {
        return Err(Error::InvalidInput("search bound must be positive".into()));
    }
    let ell = spec.ell();
    let qmax = (search_bound / &spec.delta).floor().to_integer().to_i64().unwrap_or(i64::MAX);
    let cells = (2.0 * qmax as f64 + 1.0).powi(ell as i32);
    if cells > max_cells as f64 {
        return Err(Error::BudgetExceeded(format!(
            "dual search over |q| ≤ {qmax} in dimension {ell} needs {cells:.3e} cells (cap {max_cells})"
        )));
    }
    let eps = search_bound / BigRational::from_integer(BigInt::from(spec.n));
    let eps_s = Surd::from_rational(eps.clone());
    let form = LinearForm::new(&spec.x)?;
    let build = |q: Vec<i64>, p: i64| -> Result<DualVector> {
        let res = form.exact_affine(&q, p).abs()?;
        let residual = CertifiedValue::from_surd(&res, precision_bits)?;
        let hq = q.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        let n = spec.n;
        let delta = spec.delta.clone();
        let ell_i = ell as i64;
        let sup = CertifiedValue::from_balls(
            |prec| {
                let r = r_primary(n, &delta, ell_i, prec);
                let a = Ball::from_rational(&(&delta * BigRational::from_integer(BigInt::from(hq))), prec + 16);
                let b = res.enclose(prec + 16).mul(&Ball::from_i64(n as i64, prec + 16));
                Ok(a.max(&b).div(&r).expect("R > 0"))
            },
            precision_bits,
            "dual image",
        )?;
        Ok(DualVector { q, p, residual, sup_norm_image: sup })
    };
    // q = 0 needs a nonzero p with |p| ≤ c/N
    if eps >= BigRational::one() {
        return Ok(Some(build(vec![0; ell], 1)?));
    }
    for h in 1..=qmax {
        let mut found = None;
        shell(ell, h, &mut |q| {
            let v = form.exact_affine(q, 0);
            let p = -nearest_integer(&v)?;
            let r = v.add_rational(&BigRational::from_integer(BigInt::from(p))).abs()?;
            if r.cmp_exact(&eps_s)? != Ordering::Greater {
                found = Some((q.to_vec(), p));
                return Ok(true);
            }
            Ok(false)
        })?;
        if let Some((q, p)) = found {
            return Ok(Some(build(q, p)?));
        }
    }
    Ok(None)
}

fn nearest_integer(v: &Surd) -> Result<i64> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let f = v.add_rational(&half).floor()?;
    f.to_i64().ok_or_else(|| Error::InvalidInput("value out of range".into()))
}

/// Visits `q ∈ ℤ^ℓ` with `|q|_∞ = h` in lexicographic order, keeping only
/// one of `±q` (first nonzero coordinate positive).
fn shell(ell: usize, h: i64, f: &mut dyn FnMut(&[i64]) -> Result<bool>) -> Result<bool> {
    let mut q = vec![-h; ell];
    loop {
        let on_shell = q.iter().any(|v| v.abs() == h);
        let positive = q.iter().find(|v| **v != 0).is_some_and(|v| *v > 0);
        if on_shell && positive && f(&q)? {
            return Ok(true);
        }
        let mut i = ell;
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            if q[i] < h {
                q[i] += 1;
                break;
            }
            q[i] = -h;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVerdict {
    Pass,
    Fail,
    /// Failed below the "sufficiently large" threshold `N_min`.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NalphaReport {
    pub count: u64,
    /// `4^{ℓ+1}·N·δ^ℓ`.
    pub bound: Threshold,
    pub verdict: BoundVerdict,
    pub n_min: u64,
    /// For a failure at `N ≥ N_min`, the dual witness the proof's dichotomy predicts.
    pub dual_witness: Option<DualVector>,
}

/// Default "sufficiently large" threshold.
pub const DEFAULT_N_MIN: u64 = 1_000;

/// Checks `|{q ≤ N : ‖qx‖ < δ}| ≤ 4^{ℓ+1}·N·δ^ℓ` for `δ ≥ N^{−1/τ}`.
pub fn verify_nalpha_bound(x: &RealVector, tau: &BigRational, n: u64, delta: &Threshold, n_min: u64) -> Result<NalphaReport> {
    if !tau.is_positive() {
        return Err(Error::InvalidInput("τ must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let floor = Threshold::power(n, -tau.recip());
    if delta.cmp(&floor)? == Ordering::Less {
        return Err(Error::InvalidInput(format!("δ = {delta} is below N^(-1/τ) = {floor}")));
    }
    let ell = x.dim() as u32;
    let count = count_q(&CountQuery::new(x.clone(), Delta::Fixed(delta.clone()), 0, n))?.count;
    let c = Pow::pow(BigInt::from(4), ell + 1) * BigInt::from(n);
    let bound = delta.powi(ell).scale(&BigRational::from_integer(c));
    let pass = bound.at_least(&Surd::from_int(count as i64))?;
    let verdict = match (pass, n >= n_min) {
        (true, _) => BoundVerdict::Pass,
        (false, true) => BoundVerdict::Fail,
        (false, false) => BoundVerdict::Inconclusive,
    };
    let mut dual_witness = None;
    if verdict == BoundVerdict::Fail {
        if let Some(d) = delta.as_rational().filter(|d| d < &BigRational::one()) {
            let spec = build_lattice(x, n, &d, 64)?;
            dual_witness = dual_short_vector(&spec, &BigRational::from_integer(BigInt::from(8)), 100_000_000, 64)?;
        }
    }
    Ok(NalphaReport { count, bound, verdict, n_min, dual_witness })
}

/// Default `≪` constant of the dual system.
pub fn default_search_bound() -> BigRational {
    BigRational::from_integer(BigInt::from(8))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn shell_visits_half_of_each_sphere() {
        let mut seen = Vec::new();
        shell(2, 1, &mut |q| {
            seen.push(q.to_vec());
            Ok(false)
        })
        .unwrap();
        assert_eq!(seen, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn integers_in_open_window() {
        let v = Surd::from_rational(rat(1, 2));
        assert_eq!(integers_near(&v, &rat(1, 2)).unwrap(), 0);
        assert_eq!(integers_near(&v, &rat(3, 4)).unwrap(), 2);
        assert_eq!(integers_near(&Surd::from_int(3), &rat(1, 10)).unwrap(), 1);
    }
}
