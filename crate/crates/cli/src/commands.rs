//! One function per subcommand: parse the resolved parameters, call the
//! owning module, and lay the result out as a table plus a verdict.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use dioph::approx::{classify_divergence, ApproxFunction, DivergenceRule};
use dioph::counting::{block_counts, count_q, partial_series, CountQuery, Delta};
use dioph::exponents::{
    check_extension_monotonicity, check_transference, estimate_omega_d, estimate_omega_s, estimate_tau_d,
    vwa_witnesses, Aggregation, ExponentConfig, ExponentEstimate,
};
use dioph::lattice::{build_lattice, count_lattice_points, dual_short_vector, verify_nalpha_bound};
use dioph::measure::{approximable_fraction, phi_contrast, subspace_fraction, FractionReport, MeasureExperiment, Sampling};
use dioph::real::{parse_rational, RealVector, Threshold};
use dioph::ubiquity::{check_conditions, mink_cover, select_k, UbiquityConfig, UbiquityReport};
use dioph::Error;

use crate::config::{require, Flags, Resolved};
use crate::{CliError, Output};

type Table = (Vec<String>, Vec<Vec<String>>, BTreeMap<String, Value>);

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn point(s: &str) -> Result<RealVector, CliError> {
    Ok(s.parse::<RealVector>()?)
}

fn psi(s: &str) -> Result<ApproxFunction, CliError> {
    Ok(s.parse::<ApproxFunction>()?)
}

fn rational(s: &str) -> Result<BigRational, CliError> {
    Ok(parse_rational(s)?)
}

fn real_f64(s: &str, name: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| CliError::Core(Error::Parse(format!("--{name} expects a number, got '{s}'"))))
}

fn scan_cap(n: u64, f: &Flags) -> Result<(), CliError> {
    let cap = f.max_scan.unwrap_or(u64::MAX);
    if n > cap {
        return Err(Error::BudgetExceeded(format!("a scan to {n} exceeds max-scan = {cap}")).into());
    }
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn join(v: &[i64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

pub fn dispatch(r: &Resolved) -> Result<Output, CliError> {
    let f = &r.flags;
    let c = r.command.as_str();
    let (columns, rows, verdict) = match c {
        "count" => count(f, c)?,
        "series" => series(f, c)?,
        "exponent" => exponent(f, c)?,
        "transference" => transference(f, c)?,
        "vwa" => vwa(f, c)?,
        "lattice" => lattice(f, c)?,
        "nalpha" => nalpha(f, c)?,
        "cover" => cover(f, c)?,
        "ubiquity" => ubiquity(f, c)?,
        "select-k" => selectk(f, c)?,
        "measure" => measure(f, c)?,
        "phi-contrast" => contrast(f, c)?,
        "subspace" => subspace(f, c)?,
        other => return Err(CliError::Config(format!("unknown command '{other}'"))),
    };
    Ok(Output {
        command: r.command.clone(),
        echo: r.echo.clone(),
        defaults: r.defaults.clone(),
        columns,
        rows,
        verdict,
    })
}

const COUNT_COLUMNS: &[&str] = &["j", "q_lo", "q_hi", "threshold", "count", "bound", "pass"];

fn count(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    if let Some(k) = f.kbase {
        let p = psi(require(&f.psi, "psi", c)?)?;
        let jhi = *require(&f.jhi, "jhi", c)?;
        let top = k.checked_pow(jhi).ok_or_else(|| Error::BudgetExceeded(format!("{k}^{jhi} overflows")))?;
        scan_cap(top, f)?;
        let rows: Vec<Vec<String>> = block_counts(&x, &p, k, jhi)?
            .into_iter()
            .map(|b| {
                vec![
                    b.j.to_string(),
                    b.q_lo.to_string(),
                    b.q_hi.to_string(),
                    b.threshold.to_string(),
                    b.count.to_string(),
                    opt(b.bound),
                    opt(b.pass),
                ]
            })
            .collect();
        let total: u64 = rows.iter().map(|r| r[4].parse::<u64>().unwrap_or(0)).sum();
        return Ok((cols(COUNT_COLUMNS), rows, BTreeMap::from([("total".into(), json!(total.to_string()))])));
    }
    let n = *require(&f.n, "N", c)?;
    scan_cap(n, f)?;
    let delta = match (&f.delta, &f.psi) {
        (Some(d), None) => Delta::rational(rational(d)?),
        (None, Some(p)) => Delta::Psi(psi(p)?),
        _ => return Err(CliError::Config("'count' needs exactly one of --delta and --psi".into())),
    };
    let mut q = CountQuery::new(x, delta, f.m.unwrap_or(0), n);
    if let Some(g) = &f.gamma {
        q = q.with_shift(point(g)?);
    }
    let rep = count_q(&q)?;
    let pass = if rep.bound_satisfied { "pass" } else { "fail" };
    let row = vec![
        String::new(),
        q.m.to_string(),
        n.to_string(),
        rep.threshold.to_string(),
        rep.count.to_string(),
        rep.lemma_lower_bound.to_string(),
        pass.to_string(),
    ];
    let verdict = BTreeMap::from([("count".into(), json!(rep.count.to_string())), ("bound".into(), json!(pass))]);
    Ok((cols(COUNT_COLUMNS), vec![row], verdict))
}

fn series(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let p = psi(require(&f.psi, "psi", c)?)?;
    let qmax = *require(&f.qmax, "Qmax", c)?;
    scan_cap(qmax, f)?;
    let d = f.d.unwrap_or(x.dim() as u32 + 1);
    if d as usize <= x.dim() {
        return Err(CliError::Config(format!("d = {d} must exceed dim x = {}", x.dim())));
    }
    let k = d - x.dim() as u32;
    let sums = partial_series(&x, &p, k, qmax)?;
    let m_max = (64 - qmax.leading_zeros()).max(1);
    let div = classify_divergence(&p, d, m_max, &DivergenceRule::default())?;
    let rows = sums.iter().map(|(q, s)| vec![q.to_string(), s.to_string()]).collect();
    let verdict = BTreeMap::from([
        ("psi_d_series".into(), json!(div.verdict.to_string())),
        ("psi_d_series_data".into(), json!(div.data_verdict.to_string())),
        ("exponent_k".into(), json!(k.to_string())),
    ]);
    Ok((cols(&["Q", "partial_sum"]), rows, verdict))
}

fn exp_cfg(f: &Flags) -> Result<ExponentConfig, CliError> {
    let mut cfg = ExponentConfig::default();
    if let Some(a) = &f.aggregation {
        cfg.aggregation = a.parse::<Aggregation>()?;
    }
    if let Some(m) = f.max_cells {
        cfg.max_cells = m;
    }
    Ok(cfg)
}

fn estimate_rows(e: &ExponentEstimate) -> Vec<Vec<String>> {
    e.blocks
        .iter()
        .map(|b| vec![b.b.to_string(), b.lo.to_string(), b.hi.to_string(), b.value.to_string(), join(&b.witness)])
        .collect()
}

fn estimate_verdict(e: &ExponentEstimate) -> BTreeMap<String, Value> {
    let mut v = BTreeMap::from([
        ("kind".into(), json!(e.kind.to_string())),
        ("value".into(), json!(e.value.to_string())),
        ("height".into(), json!(e.height.to_string())),
        ("effective_height".into(), json!(e.effective_height.to_string())),
        ("exact_resonance".into(), json!(e.is_exact_resonance)),
        ("still_increasing".into(), json!(e.still_increasing())),
        ("warnings".into(), json!(e.warnings)),
    ]);
    if let Some(r) = e.regime {
        v.insert("regime".into(), serde_json::to_value(r).unwrap_or(Value::Null));
    }
    if let Some((w, val)) = e.best_witnesses.first() {
        v.insert("best_witness".into(), json!(format!("{} -> {}", join(w), val)));
    }
    v
}

fn exponent(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let cfg = exp_cfg(f)?;
    let kind = require(&f.kind, "kind", c)?.as_str();
    let est = match kind {
        "tau_D" => estimate_tau_d(&x, *require(&f.h, "H", c)?, &cfg)?,
        "omega_D" => estimate_omega_d(&x, *require(&f.h, "H", c)?, &cfg)?,
        "omega_S" => estimate_omega_s(&x, *require(&f.qmax, "Qmax", c)?, &cfg)?,
        other => {
            return Err(Error::Parse(format!("bad kind '{other}': expected tau_D, omega_D or omega_S")).into());
        }
    };
    let mut verdict = estimate_verdict(&est);
    if let Some(y) = &f.y {
        let h = *require(&f.h, "H", c)?;
        let ext = check_extension_monotonicity(&x, &point(y)?, h, &cfg)?;
        verdict.insert("extension_holds".into(), json!(ext.holds));
        verdict.insert("extension_value".into(), json!(ext.extended.to_string()));
    }
    Ok((cols(&["block", "height_lo", "height_hi", "block_max", "witness"]), estimate_rows(&est), verdict))
}

fn transference(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let cfg = exp_cfg(f)?;
    let h = *require(&f.h, "H", c)?;
    let qmax = *require(&f.qmax, "Qmax", c)?;
    let slack = real_f64(require(&f.slack, "slack", c)?, "slack")?;
    let wd = estimate_omega_d(&x, h, &cfg)?;
    let ws = estimate_omega_s(&x, qmax, &cfg)?;
    let chk = check_transference(wd.value, ws.value, x.dim() as u32, slack)?;
    let flagged = !chk.pass && (wd.still_increasing() || ws.still_increasing());
    let rows = vec![
        vec!["omega_D".into(), wd.value.to_string(), wd.effective_height.to_string(), wd.still_increasing().to_string()],
        vec!["omega_S".into(), ws.value.to_string(), ws.effective_height.to_string(), ws.still_increasing().to_string()],
        vec!["lower".into(), chk.lower.to_string(), String::new(), String::new()],
        vec!["upper".into(), chk.upper.to_string(), String::new(), String::new()],
    ];
    let status = if chk.pass {
        "pass"
    } else if flagged {
        "flagged"
    } else {
        "fail"
    };
    let verdict = BTreeMap::from([("transference".into(), json!(status)), ("slack".into(), json!(slack.to_string()))]);
    Ok((cols(&["quantity", "value", "height", "still_increasing"]), rows, verdict))
}

fn vwa(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let eps = rational(require(&f.epsilon, "epsilon", c)?)?;
    let qmax = *require(&f.qmax, "Qmax", c)?;
    scan_cap(qmax, f)?;
    let w = vwa_witnesses(&x, &eps, qmax)?;
    let rows = w.iter().map(|q| vec![q.to_string()]).collect();
    let mut verdict = BTreeMap::from([("witnesses".into(), json!(w.len().to_string()))]);
    if let Some(y) = &f.y {
        let h = *require(&f.h, "H", c)?;
        let ext = check_extension_monotonicity(&x, &point(y)?, h, &ExponentConfig::default())?;
        verdict.insert("extension_base".into(), json!(ext.base.to_string()));
        verdict.insert("extension_value".into(), json!(ext.extended.to_string()));
        verdict.insert("extension_holds".into(), json!(ext.holds));
    }
    Ok((cols(&["q"]), rows, verdict))
}

fn lattice(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let n = *require(&f.n, "N", c)?;
    scan_cap(n, f)?;
    let delta = rational(require(&f.delta, "delta", c)?)?;
    let bits = f.precision.unwrap_or(64);
    let spec = build_lattice(&x, n, &delta, bits)?;
    let count = count_lattice_points(&spec)?;
    let sb = rational(require(&f.search_bound, "search-bound", c)?)?;
    let dual = dual_short_vector(&spec, &sb, f.max_cells.unwrap_or(100_000_000), bits)?;
    let mut rows = vec![
        vec!["t".into(), spec.t.to_string()],
        vec!["R".into(), spec.r.to_string()],
        vec!["R_alt".into(), spec.r_alt.to_string()],
        vec!["det".into(), spec.determinant.to_string()],
        vec!["count".into(), count.to_string()],
    ];
    if let Some(dv) = &dual {
        rows.push(vec!["dual_q".into(), join(&dv.q)]);
        rows.push(vec!["dual_p".into(), dv.p.to_string()]);
        rows.push(vec!["dual_residual".into(), dv.residual.to_string()]);
        rows.push(vec!["dual_image".into(), dv.sup_norm_image.to_string()]);
    }
    let verdict = BTreeMap::from([
        ("unimodular".into(), json!(spec.is_unimodular())),
        ("count".into(), json!(count.to_string())),
        ("dual_found".into(), json!(dual.is_some())),
    ]);
    Ok((cols(&["quantity", "value"]), rows, verdict))
}

fn nalpha(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let tau = rational(require(&f.tau, "tau", c)?)?;
    let n = *require(&f.n, "N", c)?;
    scan_cap(n, f)?;
    let d = require(&f.delta, "delta", c)?;
    let delta = if d == "boundary" {
        Threshold::power(n, -tau.recip())
    } else {
        Threshold::rational(rational(d)?)
    };
    let rep = verify_nalpha_bound(&x, &tau, n, &delta, f.n_min.unwrap_or(1000))?;
    let bound = rep.bound.enclosure_f64();
    let rows = vec![vec![
        n.to_string(),
        delta.to_string(),
        rep.count.to_string(),
        rep.bound.to_string(),
        format!("[{:e},{:e}]", bound.lo, bound.hi),
        serde_json::to_value(rep.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
    ]];
    let mut verdict = BTreeMap::from([(
        "bound".into(),
        serde_json::to_value(rep.verdict).unwrap_or(Value::Null),
    )]);
    if let Some(w) = &rep.dual_witness {
        verdict.insert("dual_witness".into(), json!(format!("q={} p={}", join(&w.q), w.p)));
    }
    Ok((cols(&["N", "delta", "count", "bound", "bound_enclosure", "verdict"]), rows, verdict))
}

fn cover(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let p = psi(require(&f.psi, "psi", c)?)?;
    let n = *require(&f.n, "N", c)?;
    scan_cap(n, f)?;
    let u = mink_cover(&x, &p, n, f.max_events.unwrap_or(dioph::ubiquity::DEFAULT_MAX_EVENTS))?;
    let rows = u.intervals().iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect();
    let m = u.measure();
    let verdict = BTreeMap::from([
        ("measure_lower".into(), json!(m.lower.to_string())),
        ("measure_upper".into(), json!(m.upper.to_string())),
        ("full".into(), json!(m.lower == BigRational::from_integer(BigInt::from(1)))),
    ]);
    Ok((cols(&["lo", "hi"]), rows, verdict))
}

fn ubi_cfg(f: &Flags) -> Result<UbiquityConfig, CliError> {
    let mut cfg = UbiquityConfig::default();
    if let Some(k) = &f.kappa_floor {
        cfg.kappa_floor = rational(k)?;
    }
    if let Some(e) = f.max_events {
        cfg.max_events = e;
    }
    if let Some(s) = f.max_scan {
        cfg.max_n = s;
    }
    Ok(cfg)
}

const UBI_COLUMNS: &[&str] =
    &["k", "c", "j", "block_count", "union_measure", "R_ratio", "D_partial", "D_normalized", "small_mass", "nreq"];

fn ubi_rows(r: &UbiquityReport) -> Vec<Vec<String>> {
    r.rows
        .iter()
        .map(|w| {
            vec![
                r.k.to_string(),
                r.c.to_string(),
                w.j.to_string(),
                w.block_count.to_string(),
                w.union_measure.to_string(),
                w.r_ratio.to_string(),
                w.d_partial.to_string(),
                w.d_normalized.to_string(),
                w.small_mass.to_string(),
                w.nreq.to_string(),
            ]
        })
        .collect()
}

fn ubi_verdict(r: &UbiquityReport) -> BTreeMap<String, Value> {
    BTreeMap::from([
        ("k".into(), json!(r.k.to_string())),
        ("c".into(), json!(r.c.to_string())),
        ("U".into(), json!(r.u.to_string())),
        ("R".into(), json!(r.r.to_string())),
        ("D".into(), json!(r.d_verdict.to_string())),
        ("kappa_floor".into(), json!(r.kappa_floor.to_string())),
        ("kappa_witness".into(), json!(opt(r.kappa_witness.as_ref()))),
        ("displacement_from".into(), json!(opt(r.displacement_from))),
    ])
}

fn dims(f: &Flags, x: &RealVector) -> u32 {
    f.d.unwrap_or(x.dim() as u32 + 1)
}

fn ubiquity(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let p = psi(require(&f.psi, "psi", c)?)?;
    let k = *require(&f.kbase, "kbase", c)?;
    let cc = match &f.c {
        Some(s) => rational(s)?,
        None => BigRational::from_integer(BigInt::from(2 * k)),
    };
    let r = check_conditions(&x, &p, dims(f, &x), k, &cc, f.jlo.unwrap_or(1), *require(&f.jhi, "jhi", c)?, &ubi_cfg(f)?)?;
    Ok((cols(UBI_COLUMNS), ubi_rows(&r), ubi_verdict(&r)))
}

fn selectk(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let p = psi(require(&f.psi, "psi", c)?)?;
    let ks = require(&f.ks, "ks", c)?
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| CliError::Core(Error::Parse(format!("bad k '{s}' in --ks")))))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = select_k(&x, &p, dims(f, &x), &ks, f.jlo.unwrap_or(1), *require(&f.jhi, "jhi", c)?, &ubi_cfg(f)?)?;
    let mut verdict = match &rep.chosen {
        Some(r) => ubi_verdict(r),
        None => BTreeMap::from([("k".into(), json!("none-found"))]),
    };
    let diag: Vec<String> = rep
        .diagnostics
        .iter()
        .map(|d| {
            format!(
                "k={} j_evaluated={} displacement_from={} U={} kappa={} accepted={}{}",
                d.k,
                opt(d.j_evaluated),
                opt(d.displacement_from),
                opt(d.u),
                opt(d.kappa_witness.as_ref()),
                d.accepted,
                d.stopped_by.as_ref().map(|s| format!(" stopped: {s}")).unwrap_or_default()
            )
        })
        .collect();
    verdict.insert("diagnostics".into(), json!(diag));
    let rows = rep.chosen.as_ref().map(ubi_rows).unwrap_or_default();
    Ok((cols(UBI_COLUMNS), rows, verdict))
}

fn sampling(f: &Flags, c: &str) -> Result<Sampling, CliError> {
    let n = *require(&f.points, "points", c)?;
    match require(&f.sampling, "sampling", c)?.as_str() {
        "grid" => Ok(Sampling::Grid { n_points: n }),
        "monte-carlo" => Ok(Sampling::MonteCarlo { n_points: n, seed: *require(&f.seed, "seed", c)? }),
        other => Err(Error::Parse(format!("bad sampling '{other}': expected grid or monte-carlo")).into()),
    }
}

fn experiment(f: &Flags, c: &str, psi_fn: ApproxFunction) -> Result<MeasureExperiment, CliError> {
    let qmax = *require(&f.qmax, "Qmax", c)?;
    scan_cap(qmax, f)?;
    Ok(MeasureExperiment {
        x: point(require(&f.x, "x", c)?)?,
        psi: psi_fn,
        k: f.k.unwrap_or(1),
        q0: f.q0.unwrap_or(0),
        q_max: qmax,
        sampling: sampling(f, c)?,
    })
}

fn fraction_table(r: &FractionReport, k: u32) -> (Vec<String>, Vec<Vec<String>>, BTreeMap<String, Value>) {
    let mut columns: Vec<String> = (1..=k).map(|i| format!("y{i}")).collect();
    columns.push("witness_count".into());
    columns.push("first_witness_q".into());
    let rows = r
        .points
        .iter()
        .map(|p| {
            let mut row: Vec<String> = p.y.iter().map(|c| c.to_string()).collect();
            row.push(p.witness_count.to_string());
            row.push(opt(p.first_witness));
            row
        })
        .collect();
    let seed = match r.sampling {
        Sampling::MonteCarlo { seed, .. } => seed.to_string(),
        Sampling::Grid { .. } => String::new(),
    };
    let verdict = BTreeMap::from([
        ("fraction".into(), json!(r.fraction.to_string())),
        ("Q0".into(), json!(r.q0.to_string())),
        ("Qmax".into(), json!(r.q_max.to_string())),
        ("n_points".into(), json!(r.n_points.to_string())),
        ("seed".into(), json!(seed)),
        ("sigma".into(), json!(r.sigma.to_string())),
        ("undecided_points".into(), json!(r.undecided_points.to_string())),
        ("sampler".into(), json!(dioph::measure::MONTE_CARLO_ALGORITHM)),
    ]);
    (columns, rows, verdict)
}

fn measure(f: &Flags, c: &str) -> Result<Table, CliError> {
    let e = experiment(f, c, psi(require(&f.psi, "psi", c)?)?)?;
    let r = approximable_fraction(&e)?;
    Ok(fraction_table(&r, e.k))
}

fn contrast(f: &Flags, c: &str) -> Result<Table, CliError> {
    let x = point(require(&f.x, "x", c)?)?;
    let d = dims(f, &x);
    let qmax = *require(&f.qmax, "Qmax", c)?;
    scan_cap(qmax, f)?;
    let q0 = *require(&f.q0, "Q0", c)?;
    let pc = phi_contrast(&x, d, q0, qmax, sampling(f, c)?)?;
    let (columns, rows, mut verdict) = fraction_table(&pc.report, 1);
    verdict.insert("union_bound".into(), json!(pc.union_bound.to_string()));
    verdict.insert("within_bound".into(), json!(pc.within_bound));
    Ok((columns, rows, verdict))
}

fn subspace(f: &Flags, c: &str) -> Result<Table, CliError> {
    let e = experiment(f, c, psi(require(&f.psi, "psi", c)?)?)?;
    let (r, series) = subspace_fraction(&e)?;
    let (columns, rows, mut verdict) = fraction_table(&r, e.k);
    let s: Vec<String> = series.iter().map(|(q, s)| format!("{q}:{s}")).collect();
    verdict.insert("partial_series".into(), json!(s));
    Ok((columns, rows, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dioph::exponents::ExpValue;

    #[test]
    fn witness_join() {
        assert_eq!(join(&[1, -2]), "1;-2");
        assert_eq!(opt::<u64>(None), "");
    }

    #[test]
    fn exp_value_prints_infinity() {
        assert_eq!(ExpValue::Infinite.to_string(), "inf");
    }
}
