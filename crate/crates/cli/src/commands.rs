use std::path::Path;

use num_complex::Complex64;
use qgs::asymptotics::coefficients::MAX_TRACE_ORDER;
use qgs::asymptotics::omega::MAX_SMATRIX_ORDER;
use qgs::asymptotics::WkbReference;
use qgs::heat::{self, numeric_heat_trace, spectrum_for_times};
use qgs::linalg::norm2;
use qgs::secular::SecularMatrices;
use qgs::{
    find_eigenvalues, resolvent_trace_coeffs, smatrix_series, Error, FundamentalPair, GraphDescription, Normalisation,
    QuantumGraph, Regularization, SpectrumOptions, Tolerances, TraceOptions,
};
use rayon::prelude::*;

use crate::grid::Grid;
use crate::report::{Cell, Report};
use crate::Common;

/// A command that could not produce its report.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGraph(_)
            | Error::InvalidConditions { .. }
            | Error::NeedsNormalisation(_)
            | Error::OutOfRange { .. }
            | Error::UnknownEdge(_)
            | Error::ExcludedDisc(_)
            | Error::Unsupported(_)
            | Error::Parse(_) => Failure::input(e.to_string()),
            _ => Failure::numeric(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub report: Report,
    /// `false` when a numerical check in the report failed.
    pub passed: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome { report, passed: true, warnings: Vec::new() }
    }
}

type CmdResult = Result<Outcome, Failure>;

pub fn parse_override(s: &str) -> Result<(usize, f64), String> {
    let (n, v) = s.split_once('=').ok_or_else(|| format!("expected n=value, got {s:?}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
    if !(1..=MAX_TRACE_ORDER).contains(&n) {
        return Err(format!("coefficient index must be in 1..={MAX_TRACE_ORDER}"));
    }
    let v: f64 = v.trim().parse().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((n, v))
}

fn read_description(common: &Common) -> Result<GraphDescription, Failure> {
    let path = common.graph.as_ref().ok_or_else(|| Failure::input("--graph is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    GraphDescription::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(common: &Common) -> Result<QuantumGraph, Failure> {
    let desc = read_description(common)?;
    QuantumGraph::from_description(&desc, common.normalize).map_err(|e| match e {
        Error::NeedsNormalisation(m) => Failure::input(format!("graph needs normalisation: {m}; rerun with --normalize")),
        e => e.into(),
    })
}

fn cx(z: Complex64) -> [Cell; 2] {
    [z.re.into(), z.im.into()]
}

pub fn validate(common: &Common) -> CmdResult {
    let desc = read_description(common)?;
    let (graph, _, _) = desc.build()?;
    let mut warnings = Vec::new();
    let tadpoles = graph.tadpoles();
    if !tadpoles.is_empty() && !common.normalize {
        warnings.push(format!(
            "edges {tadpoles:?} are tadpoles; rerun with --normalize to split them (checked here on the split graph)"
        ));
    }
    let qg = QuantumGraph::from_description(&desc, true)?;
    let (vmin, vmax) = qg.potential_range();
    let g = &qg.graph;
    let mut r = Report::new("validate", &["property", "value"]);
    let mut add = |k: &str, v: Cell| r.row(vec![k.into(), v]);
    add("vertices", graph.vertices().len().into());
    add("internal edges", graph.internal_edges().len().into());
    add("external edges", graph.external_edges().len().into());
    add("tadpoles", tadpoles.len().into());
    add("internal edges after normalisation", g.internal_edges().len().into());
    add("total length", g.total_length().into());
    add("compact", g.is_compact().into());
    add("potential min", vmin.into());
    add("potential max", vmax.into());
    r.note("valid", true);
    Ok(Outcome { report: r, passed: true, warnings })
}

/// Reference values, one per line; blank lines and `#` comments are skipped,
/// as is a first line that does not parse.
fn read_oracle(path: &Path) -> Result<Vec<f64>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() || field.starts_with('#') {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => {}
            Err(e) => return Err(Failure::input(format!("{} line {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn spectrum(common: &Common, lambda_max: f64, negative_only: bool, oracle: Option<&Path>, oracle_tol: f64) -> CmdResult {
    let qg = load(common)?;
    if !qg.is_compact() && !negative_only {
        return Err(Failure::input(
            "the graph has external edges, so its positive spectrum is continuous; \
             rerun with --negative-only for the discrete eigenvalues below 0",
        ));
    }
    let opts = if negative_only { SpectrumOptions::negative_only() } else { SpectrumOptions::default() };
    let spec = find_eigenvalues(&qg, lambda_max, &opts)?;
    let mut r = Report::new("spectrum", &["lambda", "k_re", "k_im", "multiplicity", "residual"]);
    for e in &spec.eigenvalues {
        let [kr, ki] = cx(e.k);
        r.row(vec![e.lambda.into(), kr, ki, e.multiplicity.into(), e.residual.into()]);
    }
    r.note("count", spec.lambdas().len());
    r.note("lambda_max", lambda_max);
    let mut passed = true;
    if let Some(path) = oracle {
        let reference: Vec<f64> = read_oracle(path)?.into_iter().filter(|&v| v <= lambda_max).collect();
        let got = spec.lambdas();
        let worst = got
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        passed = got.len() == reference.len() && worst <= oracle_tol;
        r.note("oracle count", reference.len());
        r.note("oracle max relative deviation", worst);
        r.note("oracle tolerance", oracle_tol);
        r.note("oracle pass", passed);
    }
    Ok(Outcome { report: r, passed, warnings: spec.warnings })
}

fn parse_k(s: &str) -> Result<Complex64, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Failure::input(format!("--k {s:?}: {e}")));
    match parts[..] {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Failure::input(format!("--k expects re or re,im, got {s:?}"))),
    }
}

pub fn smatrix(common: &Common, k: &str, order: usize) -> CmdResult {
    let qg = load(common)?;
    let k = parse_k(k)?;
    if order > MAX_SMATRIX_ORDER {
        return Err(Failure::input(format!("--order must be at most {MAX_SMATRIX_ORDER}")));
    }
    if k.im < 0.0 {
        return Err(Failure::input("the 𝔖-matrix is evaluated for Im k ≥ 0"));
    }
    let mode = if k.im > 0.0 { Normalisation::default() } else { Normalisation::PlaneWave };
    let mats = SecularMatrices::assemble(&qg, k, mode, Tolerances::tight())?;
    let series = smatrix_series(&qg, order).partial_sum(k, order);
    let s = &mats.s;
    let mut r = Report::new("smatrix", &["row", "col", "re", "im", "series_re", "series_im"]);
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let [a, b] = cx(s[(i, j)]);
            let [c, d] = cx(series[(i, j)]);
            r.row(vec![i.into(), j.into(), a, b, c, d]);
        }
    }
    r.note("series order", order);
    r.note("series deviation", norm2(&(s - &series)));
    Ok(Outcome::ok(r))
}

pub fn resolvent_trace(common: &Common, grid: &Grid, reg: Regularization, order: usize) -> CmdResult {
    let qg = load(common)?;
    let order = order.min(MAX_TRACE_ORDER);
    let co = resolvent_trace_coeffs(&qg, reg);
    let traces = heat::resolvent_traces(&qg, reg, &grid.points, &TraceOptions::default())?;
    let mut r = Report::new("resolvent-trace", &["kappa", "trace_re", "trace_im", "series_re", "series_im"]);
    for (&kappa, tr) in grid.points.iter().zip(&traces) {
        let asym = co.resolvent_partial_sum(Complex64::new(0.0, kappa), order);
        let [a, b] = cx(*tr);
        let [c, d] = cx(asym);
        r.row(vec![kappa.into(), a, b, c, d]);
    }
    r.note("regularization", co.regularization);
    r.note("series order", order);
    Ok(Outcome::ok(r))
}

pub fn heat_trace(common: &Common, grid: &Grid, order: usize, tol: f64) -> CmdResult {
    let qg = load(common)?;
    if !qg.is_compact() {
        return Err(Failure::input("heat traces need a compact graph (no external edges)"));
    }
    let order = order.clamp(1, MAX_TRACE_ORDER);
    let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let spec = spectrum_for_times(&qg, grid.points[0], tol)?;
    let samples = grid
        .points
        .par_iter()
        .map(|&t| numeric_heat_trace(&qg, &spec, t, tol, Some(&co)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut r = Report::new("heat-trace", &["t", "trace", "tail_bound", "series"]);
    for s in &samples {
        r.row(vec![s.t.into(), s.value.into(), s.tail_bound.into(), s.partial_sums[order - 1].into()]);
    }
    r.note("series order", order);
    r.note("eigenvalues used", spec.lambdas().len());
    Ok(Outcome::ok(r))
}

pub fn coefficients(common: &Common) -> CmdResult {
    let qg = load(common)?;
    let n = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let d = resolvent_trace_coeffs(&qg, Regularization::Dirichlet);
    let open = !qg.is_compact();
    let mut r = Report::new("coefficients", &["name", "re", "im"]);
    let mut add = |name: String, z: Complex64| {
        let [a, b] = cx(z);
        r.row(vec![name.into(), a, b]);
    };
    for i in 0..MAX_TRACE_ORDER {
        if i == 1 && open {
            add("b2 (N)".into(), n.b[1]);
            add("b2 (D)".into(), d.b[1]);
        } else {
            add(format!("b{}", i + 1), n.b[i]);
        }
    }
    for i in 0..MAX_TRACE_ORDER {
        match i {
            1 if open => {
                add("a2 (N)".into(), n.a[1]);
                add("a2 (D)".into(), d.a[1]);
            }
            2 => {
                add("a3".into(), n.a[2]);
                add("a3 (without 1/sqrt(pi))".into(), n.a3_without_sqrt_pi);
            }
            _ => add(format!("a{}", i + 1), n.a[i]),
        }
    }
    Ok(Outcome::ok(r))
}

fn fit_summary(r: &mut Report, fit: &heat::SlopeFit) {
    match fit.slope {
        Some(s) => r.note("slope", s),
        None => r.note("slope", "exact"),
    }
    r.note("threshold", fit.threshold);
    r.note("points used", fit.points_used);
    r.note("pass", fit.pass);
}

pub fn heat_residuals(common: &Common, grid: &Grid, order: usize, tol: f64, overrides: &[(usize, f64)]) -> CmdResult {
    let qg = load(common)?;
    if !qg.is_compact() {
        return Err(Failure::input("heat traces need a compact graph (no external edges)"));
    }
    if !(1..=MAX_TRACE_ORDER).contains(&order) {
        return Err(Failure::input(format!("--order must be in 1..={MAX_TRACE_ORDER}")));
    }
    let mut a = resolvent_trace_coeffs(&qg, Regularization::Neumann).a;
    for &(n, v) in overrides {
        a[n - 1] = Complex64::new(v, 0.0);
    }
    let t_min = grid.points.iter().copied().fold(f64::INFINITY, f64::min);
    let spec = spectrum_for_times(&qg, t_min, tol)?;
    let tab = heat::heat_residuals(&qg, &spec, &a, &grid.points, order, tol)?;
    let mut r = Report::new("heat-residuals", &["t", "trace", "series", "residual"]);
    for row in &tab.rows {
        r.row(vec![row.x.into(), row.numeric.re.into(), row.asymptotic.re.into(), row.residual.into()]);
    }
    r.note("order", order);
    fit_summary(&mut r, &tab.fit);
    Ok(Outcome { passed: tab.fit.pass, report: r, warnings: Vec::new() })
}

pub fn resolvent_residuals(common: &Common, grid: &Grid, order: usize, reg: Regularization) -> CmdResult {
    let qg = load(common)?;
    if !(1..=MAX_TRACE_ORDER).contains(&order) {
        return Err(Failure::input(format!("--order must be in 1..={MAX_TRACE_ORDER}")));
    }
    let tab = heat::resolvent_asymptotic_check(&qg, reg, &grid.points, order, &TraceOptions::default())?;
    let mut r = Report::new(
        "resolvent-residuals",
        &["kappa", "trace_re", "trace_im", "series_re", "series_im", "residual"],
    );
    for row in &tab.rows {
        let [a, b] = cx(row.numeric);
        let [c, d] = cx(row.asymptotic);
        r.row(vec![row.x.into(), a, b, c, d, row.residual.into()]);
    }
    r.note("order", order);
    r.note("regularization", reg.label());
    fit_summary(&mut r, &tab.fit);
    Ok(Outcome { passed: tab.fit.pass, report: r, warnings: Vec::new() })
}

/// Below this relative deviation the WKB comparison is at rounding level.
const WKB_FLOOR: f64 = 1e-11;

/// Least-squares slope of `log y` against `log x` over the points above
/// [`WKB_FLOOR`]; `None` when fewer than two remain.
fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let used: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > WKB_FLOOR).map(|p| (p.0.ln(), p.1.ln())).collect();
    if used.len() < 2 {
        return None;
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = used.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = used.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn wkb_check(common: &Common, grid: &Grid, order: usize) -> CmdResult {
    let qg = load(common)?;
    if order > 8 {
        return Err(Failure::input("--order must be at most 8"));
    }
    let mut r = Report::new("wkb-check", &["edge", "k", "deviation"]);
    let threshold = order as f64 + 1.0 - 0.5;
    let mut passed = true;
    for (j, e) in qg.graph.internal_edges().iter().enumerate() {
        let v = qg.edge_potential(j);
        let xs: Vec<f64> = (1..=8).map(|i| e.length * i as f64 / 8.0).collect();
        let devs = grid
            .points
            .par_iter()
            .map(|&k| {
                let k = Complex64::new(k, 0.0);
                let pair = FundamentalPair::solve(e.id, v, k, Normalisation::Anchored { wkb_order: order }, Tolerances::tight())?;
                let reference = WkbReference::new(&v.poly, k, order);
                let mut worst = 0.0f64;
                for &x in &xs {
                    let want = reference.eval(x);
                    worst = worst.max((pair.eval(x)?[0] - want).norm() / want.norm());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        let pts: Vec<(f64, f64)> = grid.points.iter().copied().zip(devs.iter().copied()).collect();
        for (k, d) in &pts {
            r.row(vec![e.id.into(), (*k).into(), (*d).into()]);
        }
        let slope = log_slope(&pts);
        let ok = slope.is_none_or(|s| -s >= threshold);
        passed &= ok;
        r.note(format!("edge {} slope", e.id), slope.map_or(Cell::from("exact"), Cell::from));
    }
    r.note("required decay", threshold);
    r.note("pass", passed);
    Ok(Outcome { report: r, passed, warnings: Vec::new() })
}
