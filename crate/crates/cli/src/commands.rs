use std::io::{self, BufWriter, Write};

use serde_json::{json, Map, Value};

use schlomilch::analytics::{
    logratio_stats, mc_estimate, mc_moments, moment, tilt_form, MomentMethod, MomentRequest,
};
use schlomilch::distributions::{FamilyParams, Kind, ParamsDoc};
use schlomilch::error::Error;
use schlomilch::normalization::{
    i_closed_sigma1, i_dual, i_multinomial, i_quadrature_real, NormalizationQuery,
};
use schlomilch::quadrature::Method;
use schlomilch::sympoly::{deformed_h, fractional_h, fractional_q, WeightedVector};
use schlomilch::verify::{run_all, VerifyConfig};

use crate::input::{parse_list, read_doc, read_family, read_points};
use crate::{Cli, Command, Failure, MomentRoute, Output};

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_MC_SAMPLES: usize = 100_000;
const DEFAULT_QUAD_TOL: f64 = 1e-10;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Pdf { points, point } => pdf(cli, points.as_deref(), point),
        Command::Sample => sample(cli),
        Command::Moments { ell, method } => moments(cli, ell, *method),
        Command::Logratio { pair, mc } => logratio(cli, pair, *mc),
        Command::Poly { x, alpha, degree } => poly(cli, x.as_deref(), alpha.as_deref(), *degree),
        Command::Norm => norm(cli),
        Command::Verify { suite, scale } => verify(cli, suite, *scale),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_fail(e: io::Error) -> Failure {
    Failure::Data(format!("write failed: {e}"))
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn header(m: usize) -> String {
    (1..=m).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

fn pdf(cli: &Cli, points: Option<&std::path::Path>, inline: &[String]) -> Result<(), Failure> {
    let (_, fam) = read_family(cli.params.as_deref())?;
    let records = read_points(points, inline)?;
    let m = fam.point_len();
    let mut failed = 0usize;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut json_rows = Vec::new();
    if cli.output != Some(Output::Json) {
        writeln!(out, "{},log_pdf", header(m)).map_err(io_fail)?;
    }
    for r in &records {
        let res = r.point.clone().and_then(|x| fam.log_pdf(&x).map(|v| (x, v)).map_err(|e| e.to_string()));
        if let Err(e) = &res {
            failed += 1;
            eprintln!("record {}: {e}", r.number);
        }
        if cli.output == Some(Output::Json) {
            json_rows.push(match &res {
                Ok((x, v)) => json!({ "record": r.number, "point": x, "log_pdf": v }),
                Err(e) => json!({ "record": r.number, "error": e }),
            });
        } else {
            let coords = match &r.point {
                Ok(x) => x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","),
                Err(_) => vec![""; m].join(","),
            };
            let v = res.map(|(_, v)| num(v)).unwrap_or_else(|_| "NaN".into());
            writeln!(out, "{coords},{v}").map_err(io_fail)?;
        }
    }
    if cli.output == Some(Output::Json) {
        let doc = json!({ "family": fam.name(), "records": json_rows });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable")).map_err(io_fail)?;
    }
    out.flush().map_err(io_fail)?;
    if failed > 0 {
        return Err(Failure::Data(format!("{failed} of {} records failed", records.len())));
    }
    Ok(())
}

fn sample(cli: &Cli) -> Result<(), Failure> {
    let (doc, fam) = read_family(cli.params.as_deref())?;
    let count = cli.count.unwrap_or(DEFAULT_SAMPLES);
    if count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    let xs = fam.sample(cli.seed, count).map_err(usage)?;
    let mut out = BufWriter::new(io::stdout().lock());
    if cli.output == Some(Output::Json) {
        let doc = json!({ "family": fam.name(), "params": doc, "seed": cli.seed, "count": count, "samples": xs });
        writeln!(out, "{}", serde_json::to_string(&doc).expect("serializable")).map_err(io_fail)?;
    } else {
        writeln!(out, "{}", header(fam.point_len())).map_err(io_fail)?;
        for x in &xs {
            writeln!(out, "{}", x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")).map_err(io_fail)?;
        }
    }
    out.flush().map_err(io_fail)
}

/// One reported quantity with its provenance.
struct Row {
    quantity: &'static str,
    index: String,
    value: f64,
    method: String,
    std_error: Option<f64>,
}

impl Row {
    fn new(quantity: &'static str, index: impl Into<String>, value: f64, method: impl Into<String>) -> Self {
        Row { quantity, index: index.into(), value, method: method.into(), std_error: None }
    }

    fn se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("quantity".into(), json!(self.quantity));
        m.insert("index".into(), json!(self.index));
        m.insert("value".into(), json!(self.value));
        m.insert("method".into(), json!(self.method));
        if let Some(se) = self.std_error {
            m.insert("std_error".into(), json!(se));
        }
        Value::Object(m)
    }
}

/// Writes a report: JSON (default) with `meta` fields and a `values` array,
/// or CSV rows quantity,index,value,method,std_error.
fn report(cli: &Cli, mut meta: Map<String, Value>, rows: &[Row]) -> Result<(), Failure> {
    let mut out = BufWriter::new(io::stdout().lock());
    if cli.output == Some(Output::Csv) {
        writeln!(out, "quantity,index,value,method,std_error").map_err(io_fail)?;
        for r in rows {
            let se = r.std_error.map(num).unwrap_or_default();
            writeln!(out, "{},\"{}\",{},{},{se}", r.quantity, r.index, num(r.value), r.method).map_err(io_fail)?;
        }
    } else {
        meta.insert("values".into(), Value::Array(rows.iter().map(Row::to_json).collect()));
        writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(meta)).expect("serializable")).map_err(io_fail)?;
    }
    out.flush().map_err(io_fail)
}

fn family_meta(doc: &ParamsDoc, fam: &FamilyParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("family".into(), json!(fam.name()));
    m.insert("params".into(), serde_json::to_value(doc).expect("serializable"));
    m
}

fn ell_label(ell: &[u32]) -> String {
    ell.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

fn unit(m: usize, idx: &[usize]) -> Vec<u32> {
    let mut e = vec![0u32; m];
    for &i in idx {
        e[i] += 1;
    }
    e
}

fn moments(cli: &Cli, ells: &[String], route: MomentRoute) -> Result<(), Failure> {
    let (doc, fam) = read_family(cli.params.as_deref())?;
    let m = fam.point_len();
    let tol = cli.tol.unwrap_or(DEFAULT_QUAD_TOL);
    let count = cli.count.unwrap_or(DEFAULT_MC_SAMPLES);
    let tilt = tilt_form(&fam);
    let mut meta = family_meta(&doc, &fam);
    meta.insert("route".into(), json!(format!("{route:?}").to_lowercase()));
    if route == MomentRoute::Mc {
        meta.insert("seed".into(), json!(cli.seed));
        meta.insert("count".into(), json!(count));
    }

    let value = |ell: &[u32]| -> Result<(f64, String, Option<f64>), Failure> {
        let product = |x: &[f64]| x.iter().zip(ell).map(|(v, &l)| v.powi(l as i32)).product::<f64>();
        let quadrature = || -> Result<(f64, String, Option<f64>), Failure> {
            let r = fam.expectation(&product, tol).map_err(usage)?;
            Ok((r.value, "quadrature".into(), None))
        };
        let lp: u32 = ell.iter().sum();
        let exact = |method: MomentMethod| -> Result<f64, Failure> {
            moment(&MomentRequest { family: fam.clone(), ell: ell.to_vec(), method }).map_err(usage)
        };
        match route {
            MomentRoute::Mc => {
                let e = mc_estimate(&fam, product, count, cli.seed).map_err(usage)?;
                if e.flagged() {
                    eprintln!("warning: {} non-finite draws excluded for l = {}", e.non_finite, ell_label(ell));
                }
                Ok((e.estimate, "mc".into(), Some(e.std_error)))
            }
            MomentRoute::Quadrature => quadrature(),
            MomentRoute::Auto => match &tilt {
                Some((_, _, n)) => {
                    let dirichlet = matches!(fam.kind(), Kind::Dirichlet { .. });
                    let label = if dirichlet || lp <= *n { "closed" } else { "integral1d" };
                    Ok((exact(MomentMethod::Auto)?, label.into(), None))
                }
                None => quadrature(),
            },
            MomentRoute::Closed => Ok((exact(MomentMethod::Closed)?, "closed".into(), None)),
            MomentRoute::Continuation => Ok((exact(MomentMethod::Continuation)?, "continuation".into(), None)),
            MomentRoute::Integral1d => Ok((exact(MomentMethod::Integral1d)?, "integral1d".into(), None)),
        }
    };

    let mut rows = Vec::new();
    if !ells.is_empty() {
        for s in ells {
            let ell: Vec<u32> = parse_list(s, "ell")?;
            if ell.len() != m {
                return Err(Failure::Usage(format!("ell '{s}' needs {m} entries")));
            }
            let (v, method, se) = value(&ell)?;
            let r = Row::new("moment", ell_label(&ell), v, method);
            rows.push(if let Some(se) = se { r.se(se) } else { r });
        }
        return report(cli, meta, &rows);
    }

    if route == MomentRoute::Mc {
        let s = mc_moments(&fam, |x| x.to_vec(), count, cli.seed).map_err(usage)?;
        if s.non_finite > 0 {
            meta.insert("non_finite".into(), json!(s.non_finite));
        }
        for i in 0..m {
            rows.push(Row::new("mean", (i + 1).to_string(), s.mean[i], "mc").se(s.mean_se[i]));
        }
        for i in 0..m {
            for j in i..m {
                rows.push(Row::new("cov", format!("{},{}", i + 1, j + 1), s.cov[i][j], "mc").se(s.cov_se[i][j]));
            }
        }
        return report(cli, meta, &rows);
    }

    let mut means = Vec::with_capacity(m);
    for i in 0..m {
        let (v, method, _) = value(&unit(m, &[i]))?;
        rows.push(Row::new("mean", (i + 1).to_string(), v, method.clone()));
        means.push((v, method));
    }
    for i in 0..m {
        for j in i..m {
            let (v, method, _) = value(&unit(m, &[i, j]))?;
            let label = if method == means[i].1 && method == means[j].1 {
                method
            } else {
                let mut parts = vec![method, means[i].1.clone(), means[j].1.clone()];
                parts.dedup();
                parts.join("+")
            };
            rows.push(Row::new("cov", format!("{},{}", i + 1, j + 1), v - means[i].0 * means[j].0, label));
        }
    }
    report(cli, meta, &rows)
}

fn logratio(cli: &Cli, pairs: &[String], with_mc: bool) -> Result<(), Failure> {
    let (doc, fam) = read_family(cli.params.as_deref())?;
    let k = fam.k();
    let quads: Vec<(usize, usize, usize, usize)> = if pairs.is_empty() {
        (0..k - 1).flat_map(|i| (i..k - 1).map(move |a| (i, k - 1, a, k - 1))).collect()
    } else {
        pairs
            .iter()
            .map(|s| {
                let v: Vec<usize> = parse_list(s, "pair")?;
                if v.len() != 4 || v.iter().any(|&i| i == 0 || i > k) {
                    return Err(Failure::Usage(format!("pair '{s}' needs four indices in 1..={k}")));
                }
                if v[0] == v[1] || v[2] == v[3] {
                    return Err(Failure::Usage(format!("pair '{s}': a log-ratio needs two distinct indices")));
                }
                Ok((v[0] - 1, v[1] - 1, v[2] - 1, v[3] - 1))
            })
            .collect::<Result<_, _>>()?
    };
    let stats = logratio_stats(&fam, &quads).map_err(usage)?;
    let closed = match fam.kind() {
        Kind::DirichletMixture { alpha, gamma, n, sigma } | Kind::SchlomilchMixture { alpha, gamma, n, sigma, .. } => {
            NormalizationQuery::new(alpha.clone(), gamma.clone(), *n, *sigma).map_err(usage)?.closed_derivatives()
        }
        _ => true,
    };
    let method = if closed { "closed" } else { "finite-difference" };

    let mut ratios: Vec<(usize, usize)> = Vec::new();
    for &(i, j, a, b) in &quads {
        for r in [(i, j), (a, b)] {
            if !ratios.contains(&r) {
                ratios.push(r);
            }
        }
    }
    let pos = |r: (usize, usize)| ratios.iter().position(|&v| v == r).expect("listed");
    let label = |(i, j): (usize, usize)| format!("{}/{}", i + 1, j + 1);
    let mut means = vec![0.0; ratios.len()];
    for e in &stats {
        means[pos((e.pair.0, e.pair.1))] = e.mean_ij;
        means[pos((e.pair.2, e.pair.3))] = e.mean_kl;
    }
    let mut rows = Vec::new();
    for (r, v) in ratios.iter().zip(&means) {
        rows.push(Row::new("mean_log_ratio", label(*r), *v, method));
    }
    for e in &stats {
        let (i, j, a, b) = e.pair;
        rows.push(Row::new("cov_log_ratio", format!("{},{}", label((i, j)), label((a, b))), e.cov, method));
    }
    let mut meta = family_meta(&doc, &fam);
    if with_mc {
        let count = cli.count.unwrap_or(DEFAULT_MC_SAMPLES);
        let s = mc_moments(&fam, |x| ratios.iter().map(|&(i, j)| (x[i] / x[j]).ln()).collect(), count, cli.seed)
            .map_err(usage)?;
        for (idx, r) in ratios.iter().enumerate() {
            rows.push(Row::new("mean_log_ratio", label(*r), s.mean[idx], "mc").se(s.mean_se[idx]));
        }
        for e in &stats {
            let (i, j, a, b) = e.pair;
            let (p, q) = (pos((i, j)), pos((a, b)));
            rows.push(
                Row::new("cov_log_ratio", format!("{},{}", label((i, j)), label((a, b))), s.cov[p][q], "mc")
                    .se(s.cov_se[p][q]),
            );
        }
        meta.insert("seed".into(), json!(cli.seed));
        meta.insert("count".into(), json!(count));
    }
    report(cli, meta, &rows)
}

fn poly(cli: &Cli, x: Option<&str>, alpha: Option<&str>, degree: f64) -> Result<(), Failure> {
    let doc = match (&cli.params, x) {
        (Some(p), _) => Some(read_doc(Some(p))?),
        (None, None) => return Err(Failure::Usage("poly needs --x or --params with a gamma field".into())),
        (None, Some(_)) => None,
    };
    let gamma: Vec<f64> = match x {
        Some(s) => parse_list(s, "x")?,
        None => doc
            .as_ref()
            .and_then(|d| d.gamma.clone())
            .ok_or_else(|| Failure::Usage("params document has no gamma field".into()))?,
    };
    let alpha: Vec<f64> = match (alpha, x) {
        (Some(s), _) => parse_list(s, "alpha")?,
        (None, None) => doc.as_ref().and_then(|d| d.alpha.clone()).unwrap_or_else(|| vec![1.0; gamma.len()]),
        (None, Some(_)) => vec![1.0; gamma.len()],
    };
    if gamma.is_empty() || alpha.len() != gamma.len() {
        return Err(Failure::Usage("x and alpha must be non-empty and of equal length".into()));
    }
    if !degree.is_finite() {
        return Err(Failure::Usage("degree must be finite".into()));
    }
    let standard = alpha.iter().all(|&a| a == 1.0);
    let mut rows = Vec::new();
    if degree >= 0.0 && degree.fract() == 0.0 && degree <= u32::MAX as f64 {
        let n = degree as u32;
        let w = WeightedVector::new(alpha.clone(), gamma.clone()).map_err(usage)?;
        let h = deformed_h(&w, n);
        let count = deformed_h(&WeightedVector::new(alpha.clone(), vec![1.0; gamma.len()]).map_err(usage)?, n);
        rows.push(Row::new("h", n.to_string(), h, "closed"));
        rows.push(Row::new("q", n.to_string(), h / count, "closed"));
    } else {
        if !standard {
            return Err(Failure::Usage("non-integer or negative degrees are defined for unit weights only".into()));
        }
        rows.push(Row::new("h", degree.to_string(), fractional_h(&gamma, degree).map_err(usage)?, "simplex-integral"));
        rows.push(Row::new("q", degree.to_string(), fractional_q(&gamma, degree).map_err(usage)?, "simplex-integral"));
    }
    let mut meta = Map::new();
    meta.insert("x".into(), json!(gamma));
    meta.insert("alpha".into(), json!(alpha));
    meta.insert("degree".into(), json!(degree));
    meta.insert("standard".into(), json!(standard));
    report(cli, meta, &rows)
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn norm(cli: &Cli) -> Result<(), Failure> {
    let (doc, fam) = read_family(cli.params.as_deref())?;
    let alpha = doc.alpha.clone().ok_or_else(|| Failure::Usage("params document needs alpha".into()))?;
    let gamma = doc.gamma.clone().unwrap_or_else(|| vec![1.0; alpha.len()]);
    let n = doc.n.unwrap_or(0);
    let sigma = doc.sigma.unwrap_or(1.0);
    let q = NormalizationQuery::new(alpha.clone(), gamma.clone(), n, sigma).map_err(usage)?;
    let tol = cli.tol.unwrap_or(1e-11);

    let mut rows = Vec::new();
    let mut unavailable = Vec::new();
    let mut push = |name: &str, r: Result<f64, Error>| match r {
        Ok(v) => rows.push(Row::new("I", name.to_string(), v, name.to_string())),
        Err(e) => unavailable.push(json!({ "method": name, "reason": e.to_string() })),
    };
    push("multinomial", i_multinomial(&q));
    if sigma == 1.0 {
        push("closed", i_closed_sigma1(&alpha, &gamma, n));
    }
    push("quadrature", i_quadrature_real(&alpha, &gamma, n as f64, sigma, tol, Method::Auto).map(|r| r.value));
    push("dual", i_dual(&q));

    let mut worst: f64 = 0.0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            worst = worst.max(rel_dev(rows[a].value, rows[b].value));
        }
    }
    let mut meta = family_meta(&doc, &fam);
    meta.insert("alpha".into(), json!(alpha));
    meta.insert("gamma".into(), json!(gamma));
    meta.insert("n".into(), json!(n));
    meta.insert("sigma".into(), json!(sigma));
    meta.insert("max_pairwise_rel_deviation".into(), json!(worst));
    if !unavailable.is_empty() {
        meta.insert("unavailable".into(), Value::Array(unavailable));
    }
    report(cli, meta, &rows)
}

fn verify(cli: &Cli, suites: &[String], scale: f64) -> Result<(), Failure> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Failure::Usage(format!("--scale must be positive, got {scale}")));
    }
    let cfg = VerifyConfig { scale, seed: cli.seed, tol: cli.tol };
    let reports = run_all(suites, &cfg).map_err(usage)?;
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(|c| format!("{}/{}", c.suite, c.identity)))
        .collect();
    let mut out = BufWriter::new(io::stdout().lock());
    match cli.output {
        Some(Output::Json) => {
            let doc = json!({
                "passed": failed.is_empty(),
                "checks": total,
                "failed": failed,
                "seed": cli.seed,
                "scale": scale,
                "suites": reports,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable")).map_err(io_fail)?;
        }
        Some(Output::Csv) => {
            writeln!(out, "suite,identity,passed,cases,worst,limit,violations,skipped").map_err(io_fail)?;
            for r in &reports {
                for c in &r.checks {
                    let m = &c.measure;
                    writeln!(
                        out,
                        "{},\"{}\",{},{},{},{},{},{}",
                        c.suite,
                        c.identity.replace('"', "'"),
                        c.passed,
                        m.cases,
                        num(m.worst),
                        num(c.limit),
                        m.violations,
                        m.skipped
                    )
                    .map_err(io_fail)?;
                }
            }
        }
        None => {
            for r in &reports {
                writeln!(out, "== {} ({:.1}s)", r.suite, r.seconds).map_err(io_fail)?;
                for c in &r.checks {
                    writeln!(out, "{c}").map_err(io_fail)?;
                }
            }
            let summary = json!({ "passed": failed.is_empty(), "checks": total, "failed": failed.len() });
            writeln!(out, "summary: {summary}").map_err(io_fail)?;
        }
    }
    out.flush().map_err(io_fail)?;
    if failed.is_empty() {
        Ok(())
    } else {
        for f in &failed {
            eprintln!("failed: {f}");
        }
        Err(Failure::Data(format!("{} of {total} checks failed", failed.len())))
    }
}
