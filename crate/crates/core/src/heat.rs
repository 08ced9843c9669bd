//! Heat traces of compact graphs from their spectra, small-`t` partial sums,
//! and the residual studies comparing both sides of the trace expansions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::coefficients::{heat_partial_sum, TraceCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::quadrature::gl20;
use crate::quantum::QuantumGraph;
use crate::resolvent::{regularized_trace, Regularization, TraceOptions};
use crate::spectrum::{find_eigenvalues, SpectralResult, SpectrumOptions};

/// Residuals below this fraction of the heat trace are rounding noise.
pub const HEAT_NOISE_FLOOR: f64 = 1e-12;
/// Residuals below this fraction of the resolvent trace are quadrature noise.
pub const RESOLVENT_NOISE_FLOOR: f64 = 1e-11;
/// Number of asymptotic grid points used in slope fits.
pub const FIT_POINTS: usize = 4;

/// Bound on `Σ_{λ_n > Λ} e^{−λ_n t}` obtained from the Weyl count.
pub fn tail_bound(qg: &QuantumGraph, lambda_max: f64, t: f64) -> f64 {
    let shift = (-qg.potential_range().0).max(0.0);
    let big = lambda_max + shift;
    let e = qg.graph.e_int() as f64;
    let len = qg.graph.total_length();
    let damp = (shift * t).exp();
    damp * ((-big * t).exp() * (e + len * big.sqrt() / PI)
        + len / (2.0 * PI) * (PI / t).sqrt() * libm::erfc((big * t).sqrt()))
}

/// Smallest `Λ` (up to a factor 1.05) whose [`tail_bound`] at `t` is below `tol`.
pub fn required_lambda_max(qg: &QuantumGraph, t: f64, tol: f64) -> f64 {
    let mut lambda = (1.0 / t).max(1.0);
    while tail_bound(qg, lambda, t) > tol {
        lambda *= 1.05;
    }
    lambda
}

/// `tr e^{−Ht}` at one time.
#[derive(Clone, Debug, Serialize)]
pub struct HeatTraceSample {
    pub t: f64,
    pub value: f64,
    pub tail_bound: f64,
    /// `partial_sums[N − 1] = Σ_{n ≤ N} a_n t^{n/2−1}`, when coefficients were given.
    pub partial_sums: Vec<f64>,
}

/// Truncated eigenvalue sum with a certified tail.
pub fn numeric_heat_trace(
    qg: &QuantumGraph,
    spectrum: &SpectralResult,
    t: f64,
    tol: f64,
    coeffs: Option<&TraceCoefficients>,
) -> Result<HeatTraceSample> {
    if !qg.is_compact() {
        return Err(Error::Unsupported("heat traces are computed for compact graphs only".into()));
    }
    let tail = tail_bound(qg, spectrum.lambda_max, t);
    if tail > tol {
        return Err(Error::Truncation {
            available: spectrum.lambda_max,
            needed: required_lambda_max(qg, t, tol),
        });
    }
    let value = spectrum
        .eigenvalues
        .iter()
        .rev()
        .map(|e| e.multiplicity as f64 * (-e.lambda * t).exp())
        .sum();
    let partial_sums = coeffs.map_or_else(Vec::new, |co| (1..=co.a.len()).map(|n| co.heat_partial_sum(t, n)).collect());
    Ok(HeatTraceSample { t, value, tail_bound: tail, partial_sums })
}

/// `Σ_{n ≤ order} a_n t^{n/2−1}`.
pub fn asymptotic_heat_trace(coeffs: &TraceCoefficients, t: f64, order: usize) -> f64 {
    coeffs.heat_partial_sum(t, order)
}

/// The spectrum needed for heat traces at every `t ≥ t_min` to accuracy `tol`.
pub fn spectrum_for_times(qg: &QuantumGraph, t_min: f64, tol: f64) -> Result<SpectralResult> {
    find_eigenvalues(qg, required_lambda_max(qg, t_min, tol), &SpectrumOptions::default())
}

/// Least-squares slope of `log|residual|` against `log x` over the asymptotic
/// end of a grid.
#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    /// `None` when every candidate point sits at the noise floor.
    pub slope: Option<f64>,
    pub threshold: f64,
    pub points_used: usize,
    pub pass: bool,
}

impl SlopeFit {
    /// Fit over `(x, residual, scale)` points that are already ordered from
    /// the asymptotic end; `sign` is `+1` when residuals should grow with `x`
    /// (small-`t`) and `−1` when they should decay (large `κ`).
    fn new(points: &[(f64, f64, f64)], floor: f64, threshold: f64, sign: f64) -> Self {
        let used: Vec<(f64, f64)> = points
            .iter()
            .take(FIT_POINTS)
            .filter(|(_, r, scale)| *r > floor * scale.abs().max(f64::MIN_POSITIVE))
            .map(|(x, r, _)| (x.ln(), r.ln()))
            .collect();
        if used.len() < 2 {
            return SlopeFit { slope: None, threshold, points_used: used.len(), pass: true };
        }
        let n = used.len() as f64;
        let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
        let my = used.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = used.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = used.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        let slope = sign * sxy / sxx;
        SlopeFit { slope: Some(slope), threshold, points_used: used.len(), pass: slope >= threshold }
    }
}

/// One row of a residual table; `x` is `t` or `κ`.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub x: f64,
    pub numeric: C64,
    pub asymptotic: C64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualTable {
    pub order: usize,
    pub rows: Vec<ResidualRow>,
    pub fit: SlopeFit,
}

/// Required small-`t` slope of the order-`N` heat residual.
pub fn heat_slope_threshold(order: usize) -> f64 {
    (order as f64 + 1.0) / 2.0 - 1.0 - 0.15
}

/// Required large-`κ` slope of the order-`N` resolvent residual.
pub fn resolvent_slope_threshold(order: usize) -> f64 {
    order as f64 + 1.0 - 0.2
}

/// Heat-trace residuals `tr e^{−Ht} − Σ_{n ≤ N} a_n t^{n/2−1}` with the given `a`.
pub fn heat_residuals(
    qg: &QuantumGraph,
    spectrum: &SpectralResult,
    a: &[C64],
    times: &[f64],
    order: usize,
    tol: f64,
) -> Result<ResidualTable> {
    let rows: Vec<ResidualRow> = times
        .par_iter()
        .map(|&t| {
            let s = numeric_heat_trace(qg, spectrum, t, tol, None)?;
            let asym = heat_partial_sum(a, t, order);
            Ok(ResidualRow { x: t, numeric: c(s.value, 0.0), asymptotic: c(asym, 0.0), residual: (s.value - asym).abs() })
        })
        .collect::<Result<_>>()?;
    let mut pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.x, r.residual, r.numeric.re)).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let fit = SlopeFit::new(&pts, HEAT_NOISE_FLOOR, heat_slope_threshold(order), 1.0);
    Ok(ResidualTable { order, rows, fit })
}

/// Heat residual study with coefficients and spectrum computed on the spot.
pub fn residual_study(qg: &QuantumGraph, times: &[f64], order: usize, tol: f64) -> Result<ResidualTable> {
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let spectrum = spectrum_for_times(qg, t_min, tol)?;
    let co = crate::asymptotics::resolvent_trace_coeffs(qg, Regularization::Neumann);
    heat_residuals(qg, &spectrum, &co.a, times, order, tol)
}

/// `tr(R_H − J R_{D/N} J*)(−κ²)` at every `κ`.
pub fn resolvent_traces(
    qg: &QuantumGraph,
    reg: Regularization,
    kappas: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<C64>> {
    kappas.par_iter().map(|&kappa| regularized_trace(qg, reg, c(0.0, kappa), opts)).collect()
}

/// Residuals `tr(…)(iκ) − Σ_{n ≤ N} b_n (iκ)^{−n}` from precomputed traces.
pub fn resolvent_residuals(b: &[C64], kappas: &[f64], traces: &[C64], order: usize) -> ResidualTable {
    let rows: Vec<ResidualRow> = kappas
        .iter()
        .zip(traces)
        .map(|(&kappa, &tr)| {
            let k = c(0.0, kappa);
            let asym: C64 = b.iter().take(order).enumerate().map(|(i, bn)| bn * k.powi(-(i as i32 + 1))).sum();
            ResidualRow { x: kappa, numeric: tr, asymptotic: asym, residual: (tr - asym).norm() }
        })
        .collect();
    let mut pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.x, r.residual, r.numeric.norm().max(r.asymptotic.norm()))).collect();
    pts.sort_by(|p, q| q.0.total_cmp(&p.0));
    let fit = SlopeFit::new(&pts, RESOLVENT_NOISE_FLOOR, resolvent_slope_threshold(order), -1.0);
    ResidualTable { order, rows, fit }
}

/// Resolvent-trace residual study on a `κ` grid.
pub fn resolvent_asymptotic_check(
    qg: &QuantumGraph,
    reg: Regularization,
    kappas: &[f64],
    order: usize,
    opts: &TraceOptions,
) -> Result<ResidualTable> {
    let co = crate::asymptotics::resolvent_trace_coeffs(qg, reg);
    let traces = resolvent_traces(qg, reg, kappas, opts)?;
    Ok(resolvent_residuals(&co.b, kappas, &traces, order))
}

/// `Σ_{n > computed} 1/(μ_n + κ²)` for the model spectrum
/// `√(μ_n − V̄) = (n − a₂ − ½)π/𝓛`, `V̄` the mean potential.
pub fn weyl_resolvent_tail(qg: &QuantumGraph, coeffs: &TraceCoefficients, computed: usize, kappa: f64) -> f64 {
    let len = qg.graph.total_length();
    let mean: f64 = qg.edge_potentials().iter().map(|v| v.total()).sum::<f64>() / len;
    let alpha = PI / len;
    let s = mean + kappa * kappa;
    let x0 = computed as f64 + 1.0 - coeffs.a[1].re - 0.5;
    let u = alpha * alpha * x0 * x0 + s;
    let a2 = alpha * alpha;
    let g = 1.0 / u;
    let g1 = -2.0 * a2 * x0 / (u * u);
    let g3 = 24.0 * a2 * a2 * x0 / u.powi(3) - 48.0 * a2.powi(3) * x0.powi(3) / u.powi(4);
    let integral = (PI / 2.0 - (alpha * x0 / s.sqrt()).atan()) / (alpha * s.sqrt());
    integral + g / 2.0 - g1 / 12.0 + g3 / 720.0
}

/// `Σ 1/(λ_n + κ²)` from a truncated spectrum plus [`weyl_resolvent_tail`].
pub fn eigenvalue_resolvent_sum(qg: &QuantumGraph, spectrum: &SpectralResult, coeffs: &TraceCoefficients, kappa: f64) -> f64 {
    let lambdas = spectrum.lambdas();
    let head: f64 = lambdas.iter().rev().map(|l| 1.0 / (l + kappa * kappa)).sum();
    head + weyl_resolvent_tail(qg, coeffs, lambdas.len(), kappa)
}

/// Lower incomplete gamma `γ(s, x)` for `s ∈ ½ℕ`, `s > 0`.
fn lower_gamma_half(s: f64, x: f64) -> f64 {
    let twice = (2.0 * s).round() as u32;
    let (mut a, mut g) = if twice % 2 == 1 {
        (0.5, PI.sqrt() * libm::erf(x.sqrt()))
    } else {
        (1.0, -(-x).exp_m1())
    };
    while a < s - 0.25 {
        g = a * g - x.powf(a) * (-x).exp();
        a += 1.0;
    }
    g
}

/// `∫₀^∞ e^{−κ²t} tr e^{−Ht} dt`, with `(0, t₀]` from the order-5 expansion
/// and `[t₀, ∞)` by Gauss–Legendre quadrature of the eigenvalue sum.
pub fn laplace_transform_of_heat_trace(
    qg: &QuantumGraph,
    spectrum: &SpectralResult,
    coeffs: &TraceCoefficients,
    kappa: f64,
    t0: f64,
    tol: f64,
) -> Result<f64> {
    let k2 = kappa * kappa;
    let small: f64 = coeffs
        .a
        .iter()
        .enumerate()
        .map(|(i, an)| {
            let s = (i as f64 + 1.0) / 2.0;
            an.re * lower_gamma_half(s, k2 * t0) / k2.powf(s)
        })
        .sum();
    // Substituting t = t₀ + τ/κ² leaves an integrand decaying like e^{−τ}.
    let (nodes, weights) = gl20();
    let t_end = 60.0;
    let panels = 240;
    let h = t_end / panels as f64;
    let mut pts = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            pts.push((a + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    let values: Vec<f64> = pts
        .par_iter()
        .map(|&(tau, w)| {
            let t = t0 + tau / k2;
            let s = numeric_heat_trace(qg, spectrum, t, tol, None)?;
            Ok(w * (-tau).exp() * s.value / k2 * (-k2 * t0).exp())
        })
        .collect::<Result<_>>()?;
    Ok(small + values.iter().sum::<f64>())
}
