//! Eigenvalues from the secular equation, with multiplicities, and the
//! corresponding eigenfunctions.
//!
//! Positive eigenvalues `k² > 0` are zeros of `det(1 − U(k))`. The scan
//! samples the smallest singular value of `1 − U(k)` on a grid, refines
//! every local minimum by golden-section search and accepts it when the
//! indicator is numerically zero and `arg det(1 − U)` jumps by `mπ` across
//! the root. Negative eigenvalues use `Z̃(iκ)` in the same way. The
//! threshold `k² = 0` is handled separately through the kernel of the
//! `k = 0` boundary matrix.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::{Normalisation, EXCLUDED_RADIUS};
use crate::graph::{EdgeRef, GraphPoint};
use crate::linalg::{c, real, singular_values, CMat, C64, I};
use crate::ode::{integrate, Tolerances};
use crate::quantum::QuantumGraph;
use crate::secular::SecularMatrices;

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Oversampling of the mean eigenvalue spacing `π/𝓛` by `4·safety`.
    pub safety: f64,
    /// Relative singular-value threshold for counting multiplicities.
    pub multiplicity_threshold: f64,
    /// A refined minimum is accepted as a root below this indicator value.
    pub accept_threshold: f64,
    pub tolerances: Tolerances,
    pub positive: bool,
    pub negative: bool,
    pub zero: bool,
    /// Extra points `k > 0` near which to look for embedded eigenvalues on
    /// non-compact graphs.
    pub candidates: Vec<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            safety: 4.0,
            multiplicity_threshold: 1e-7,
            accept_threshold: 1e-7,
            tolerances: Tolerances::default(),
            positive: true,
            negative: true,
            zero: true,
            candidates: Vec::new(),
        }
    }
}

impl SpectrumOptions {
    pub fn negative_only() -> Self {
        SpectrumOptions { positive: false, zero: false, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub lambda: f64,
    /// `k > 0`, `k = iκ` for negative eigenvalues, `0` at the threshold.
    pub k: C64,
    pub multiplicity: usize,
    /// Root indicator (scaled smallest singular value) at the refined root.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    /// Ascending in `λ`.
    pub eigenvalues: Vec<Eigenvalue>,
    pub lambda_max: f64,
    pub grid_spacing: f64,
    pub warnings: Vec<String>,
}

impl SpectralResult {
    /// Eigenvalues repeated according to multiplicity.
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect()
    }

    /// Number of eigenvalues `≤ λ`, with multiplicity.
    pub fn count_up_to(&self, lambda: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.lambda <= lambda).map(|e| e.multiplicity).sum()
    }
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Singular values of `m` divided by `scale`, descending.
fn scaled_singular_values(m: &CMat, scale: f64) -> Vec<f64> {
    singular_values(m).into_iter().map(|s| s / scale).collect()
}

fn smallest(s: &[f64]) -> f64 {
    s.last().copied().unwrap_or(0.0)
}

fn count_small(s: &[f64], threshold: f64) -> usize {
    s.iter().filter(|&&x| x <= threshold).count()
}

fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    a - t * (a / t).round()
}

/// `Z̃` with every column divided by the length of the matching column of
/// the stacked Cauchy data `[X̃; Ỹ]`, and the factors used. Those columns
/// never vanish, and a column that blows up near a zero of `u⁻(l)` is
/// divided by the same blow-up, so the result has no poles and is singular
/// exactly where `Z̃` is.
fn equilibrated_z(m: &SecularMatrices) -> (CMat, Vec<f64>) {
    let (x, y) = m.xy_tilde();
    let mut z = (&m.p + &m.l) * &x + &m.p_perp * &y;
    let scales: Vec<f64> = (0..z.ncols())
        .map(|j| {
            let n = x.column(j).norm_squared() + y.column(j).norm_squared();
            let f = if n > 0.0 && n.is_finite() { 1.0 / n.sqrt() } else { 1.0 };
            z.column_mut(j).scale_mut(f);
            f
        })
        .collect();
    (z, scales)
}

/// Which matrix the indicator is taken of.
#[derive(Clone, Copy)]
enum Indicator {
    /// `1 − U(k)`, real `k`.
    Unitary,
    /// `Z̃(iκ)`, anchored.
    Imaginary,
    /// `Z̃(k)`, real `k`, plane-wave.
    Embedded,
}

struct Scanner<'a> {
    qg: &'a QuantumGraph,
    tol: Tolerances,
    kind: Indicator,
}

impl Scanner<'_> {
    /// Singular values of the indicator matrix at `t`, relative to a scale
    /// that stays away from zero at roots: the largest singular value (at
    /// least 1) for `1 − U`, and unit Cauchy-data columns for `Z̃`.
    fn singular_values(&self, t: f64) -> Result<Vec<f64>> {
        match self.kind {
            Indicator::Unitary => {
                let m = SecularMatrices::assemble(self.qg, real(t), Normalisation::PlaneWave, self.tol)?
                    .one_minus_u();
                let s = singular_values(&m);
                let scale = s.first().copied().unwrap_or(1.0).max(1.0);
                Ok(s.into_iter().map(|x| x / scale).collect())
            }
            Indicator::Imaginary | Indicator::Embedded => {
                let (k, mode) = match self.kind {
                    Indicator::Imaginary => (c(0.0, t), Normalisation::default()),
                    _ => (real(t), Normalisation::PlaneWave),
                };
                let m = SecularMatrices::assemble(self.qg, k, mode, self.tol)?;
                Ok(singular_values(&equilibrated_z(&m).0))
            }
        }
    }

    fn indicator(&self, t: f64) -> f64 {
        self.singular_values(t).map(|s| smallest(&s)).unwrap_or(f64::INFINITY)
    }

    /// Refines a bracketed local minimum; returns `(t, indicator, multiplicity)`
    /// if it is a root.
    fn refine(&self, a: f64, b: f64, opts: &SpectrumOptions) -> Result<Option<(f64, f64, usize)>> {
        let tol = 1e-13 * b.max(1.0);
        let (t, f) = golden_min(|t| self.indicator(t), a, b, tol);
        if f > opts.accept_threshold {
            return Ok(None);
        }
        let s = self.singular_values(t)?;
        let m = count_small(&s, opts.multiplicity_threshold).max(1);
        if let Indicator::Unitary = self.kind {
            let delta = 1e-6 * t.max(1.0);
            let lo = SecularMatrices::assemble(self.qg, real(t - delta), Normalisation::PlaneWave, self.tol)?;
            let hi = SecularMatrices::assemble(self.qg, real(t + delta), Normalisation::PlaneWave, self.tol)?;
            let jump = (hi.det_one_minus_u() / lo.det_one_minus_u()).arg();
            if wrap(jump - m as f64 * std::f64::consts::PI).abs() > 0.5 {
                return Err(Error::RootRefinement(t));
            }
        }
        Ok(Some((t, f, m)))
    }

    /// All roots in `[lo, hi]`.
    fn scan(&self, lo: f64, hi: f64, h: f64, opts: &SpectrumOptions) -> Result<Vec<(f64, f64, usize)>> {
        if hi <= lo {
            return Ok(Vec::new());
        }
        let n = ((hi - lo) / h).ceil() as usize + 1;
        let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let vals: Vec<f64> = grid.par_iter().map(|&t| self.indicator(t)).collect();
        let brackets: Vec<(f64, f64)> = (0..grid.len())
            .filter(|&i| {
                let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
                let right = if i + 1 == grid.len() { f64::INFINITY } else { vals[i + 1] };
                vals[i] <= left && vals[i] < right && vals[i].is_finite()
            })
            .map(|i| (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]))
            .collect();
        let refined: Vec<Option<(f64, f64, usize)>> = brackets
            .par_iter()
            .map(|&(a, b)| self.refine(a, b, opts))
            .collect::<Result<_>>()?;
        let mut roots: Vec<(f64, f64, usize)> = Vec::new();
        for r in refined.into_iter().flatten() {
            match roots.iter_mut().find(|q| (q.0 - r.0).abs() <= 1e-8 * r.0.max(1.0)) {
                Some(q) => {
                    if r.1 < q.1 {
                        *q = r;
                    }
                }
                None => roots.push(r),
            }
        }
        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(roots)
    }
}

/// Upper bound for `κ` of negative eigenvalues `−κ²`.
pub fn kappa_bound(qg: &QuantumGraph) -> f64 {
    let l_max = qg
        .conditions
        .l
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, x| m.max(*x));
    let lmin = if qg.graph.e_int() > 0 { qg.graph.min_length() } else { f64::INFINITY };
    let from_l = (2.0 * l_max * l_max).max(if lmin.is_finite() { 4.0 * l_max / lmin } else { 0.0 });
    let (vmin, _) = qg.potential_range();
    (from_l + (-vmin).max(0.0)).sqrt() + 1.0
}

/// Dimension of the kernel of `H` (compact graphs only).
pub fn zero_mode_count(qg: &QuantumGraph, tol: Tolerances) -> Result<usize> {
    let g = &qg.graph;
    if !g.is_compact() {
        return Err(Error::Unsupported("the threshold k = 0 is only resolved on compact graphs".into()));
    }
    let n = g.e();
    let mut x = CMat::zeros(n, n);
    let mut y = CMat::zeros(n, n);
    for (j, e) in g.internal_edges().iter().enumerate() {
        let poly = &qg.edge_potential(j).poly;
        let f = |x: f64, s: &[C64; 2]| [s[1], s[0] * poly.eval(x)];
        let fail = |reason: String| Error::Integration { edge: e.id, reason };
        let h0 = e.length.min(0.1);
        let cc = integrate(f, 0.0, [real(1.0), real(0.0)], &[e.length], tol, h0).map_err(fail)?[0];
        let ss = integrate(f, 0.0, [real(0.0), real(1.0)], &[e.length], tol, h0).map_err(fail)?[0];
        let (a, b) = g.internal_slots(j);
        x[(a, a)] = real(1.0);
        y[(a, b)] = real(1.0);
        x[(b, a)] = cc[0];
        x[(b, b)] = ss[0];
        y[(b, a)] = -cc[1];
        y[(b, b)] = -ss[1];
    }
    let z = (&qg.conditions.p + &qg.conditions.l) * x + qg.conditions.p_perp() * y;
    let s = singular_values(&z);
    let scale = s.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    Ok(count_small(&scaled_singular_values(&z, scale), 1e-9))
}

/// Eigenvalues in `[λ_min, λ_max]`, where the lower end is the bound on
/// negative eigenvalues.
pub fn find_eigenvalues(qg: &QuantumGraph, lambda_max: f64, opts: &SpectrumOptions) -> Result<SpectralResult> {
    let g = &qg.graph;
    let compact = g.is_compact();
    let total = g.total_length().max(1.0);
    let h = std::f64::consts::PI / (4.0 * total * opts.safety);
    let mut out = Vec::new();
    let mut warnings = Vec::new();

    if opts.negative {
        let scanner = Scanner { qg, tol: opts.tolerances, kind: Indicator::Imaginary };
        let kmax = kappa_bound(qg);
        for (kappa, f, m) in scanner.scan(EXCLUDED_RADIUS, kmax, h, opts)? {
            out.push(Eigenvalue { lambda: -kappa * kappa, k: c(0.0, kappa), multiplicity: m, residual: f });
        }
    }
    if opts.zero && compact {
        let m = zero_mode_count(qg, opts.tolerances)?;
        if m > 0 {
            out.push(Eigenvalue { lambda: 0.0, k: c(0.0, 0.0), multiplicity: m, residual: 0.0 });
        }
    }
    if opts.positive && lambda_max > 0.0 {
        if compact {
            let scanner = Scanner { qg, tol: opts.tolerances, kind: Indicator::Unitary };
            let kmax = lambda_max.sqrt();
            for (k, f, m) in scanner.scan(EXCLUDED_RADIUS, kmax + h, h, opts)? {
                if k * k <= lambda_max {
                    out.push(Eigenvalue { lambda: k * k, k: real(k), multiplicity: m, residual: f });
                }
            }
        } else if !opts.candidates.is_empty() {
            let scanner = Scanner { qg, tol: opts.tolerances, kind: Indicator::Embedded };
            for &k0 in &opts.candidates {
                let (a, b) = ((k0 - h).max(EXCLUDED_RADIUS), k0 + h);
                if let Some((k, f, m)) = scanner.refine(a, b, opts)? {
                    out.push(Eigenvalue { lambda: k * k, k: real(k), multiplicity: m, residual: f });
                }
            }
        } else {
            return Err(Error::Unsupported(
                "positive eigenvalues of a non-compact graph are embedded in the continuum; \
                 scan negative eigenvalues only or supply candidates"
                    .into(),
            ));
        }
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    if compact && opts.positive && opts.negative && opts.zero && lambda_max > 0.0 {
        let count = out.iter().filter(|e| e.lambda > 0.0).map(|e| e.multiplicity).sum::<usize>() as f64;
        let weyl = g.total_length() * lambda_max.sqrt() / std::f64::consts::PI;
        let slack = g.e() as f64 + 2.0;
        if (count - weyl).abs() > slack {
            warnings.push(format!(
                "found {count} positive eigenvalues up to {lambda_max}, Weyl estimate {weyl:.1}; \
                 the scan grid may be too coarse (raise the safety factor)"
            ));
        }
    }
    Ok(SpectralResult { eigenvalues: out, lambda_max, grid_spacing: h, warnings })
}

/// An eigenfunction assembled from a null vector of `Z̃(k)`.
#[derive(Clone, Debug)]
pub struct Eigenfunction {
    pub k: C64,
    mats: SecularMatrices,
    /// `(γ, α, β̃)` with `ψ = α u⁺ + β̃ u⁻/u⁻(l)` on internal edges.
    pub coefficients: Vec<C64>,
}

/// Eigenfunctions at a root `k` (real positive or `iκ`), one per null
/// direction of `Z̃(k)` below the multiplicity threshold.
pub fn eigenfunctions(qg: &QuantumGraph, k: C64, threshold: f64) -> Result<Vec<Eigenfunction>> {
    if k.norm() < EXCLUDED_RADIUS {
        return Err(Error::ExcludedDisc(k));
    }
    let mode = if k.im.abs() > 0.0 { Normalisation::default() } else { Normalisation::PlaneWave };
    let mats = SecularMatrices::assemble(qg, k, mode, Tolerances::tight())?;
    let (z, scales) = equilibrated_z(&mats);
    let svd = z.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= threshold {
            let coefficients = vt.row(i).iter().zip(&scales).map(|(z, f)| z.conj() * *f).collect();
            out.push(Eigenfunction { k, mats: mats.clone(), coefficients });
        }
    }
    if out.is_empty() {
        return Err(Error::Singular(format!("Z̃({k}) has no null direction; k is not a root")));
    }
    Ok(out)
}

impl Eigenfunction {
    /// Value at a point.
    pub fn eval(&self, qg: &QuantumGraph, p: GraphPoint) -> Result<C64> {
        qg.graph.check_point(p)?;
        let k = self.k;
        match qg.graph.edge_ref(p.edge)? {
            EdgeRef::External(s) => Ok(self.coefficients[s] * (I * k * p.x).exp()),
            EdgeRef::Internal(j) => {
                let pr = &self.mats.pairs[j];
                let (a, b) = qg.graph.internal_slots(j);
                let s = pr.samples(&[p.x])?[0];
                let (_, ml) = pr.minus_ends();
                let up = (I * k * p.x).exp() * s.wp;
                let um_scaled = (I * k * (pr.length - p.x)).exp() * s.wm / ml[0];
                Ok(self.coefficients[a] * up + self.coefficients[b] * um_scaled)
            }
        }
    }

    /// Boundary values and inward derivatives, recomputed by integrating
    /// along every edge.
    pub fn boundary_data(&self, qg: &QuantumGraph) -> Result<(Vec<C64>, Vec<C64>)> {
        let g = &qg.graph;
        let n = g.e();
        let k = self.k;
        let mut val = vec![c(0.0, 0.0); n];
        let mut der = vec![c(0.0, 0.0); n];
        for s in 0..g.e_ex() {
            val[s] = self.coefficients[s];
            der[s] = I * k * self.coefficients[s];
        }
        for (j, pr) in self.mats.pairs.iter().enumerate() {
            let (a, b) = g.internal_slots(j);
            let l = pr.length;
            let sm = pr.samples(&[0.0, l])?;
            let (_, ml) = pr.minus_ends();
            let (ca, cb) = (self.coefficients[a], self.coefficients[b]);
            let ik = I * k;
            for (slot, smp, sign) in [(a, sm[0], 1.0), (b, sm[1], -1.0)] {
                let x = smp.x;
                let ep = (ik * x).exp();
                let em = (ik * (l - x)).exp() / ml[0];
                let u = ca * ep * smp.wp + cb * em * smp.wm;
                let du = ca * ep * (smp.dwp + ik * smp.wp) + cb * em * (smp.dwm - ik * smp.wm);
                val[slot] = u;
                der[slot] = du * sign;
            }
        }
        Ok((val, der))
    }

    /// `‖(P + L)ψ̲ + P⊥ψ̲′‖ / ‖(ψ̲, ψ̲′)‖`.
    pub fn boundary_residual(&self, qg: &QuantumGraph) -> Result<f64> {
        let (v, d) = self.boundary_data(qg)?;
        let v = nalgebra::DVector::from_vec(v);
        let d = nalgebra::DVector::from_vec(d);
        let r = (&qg.conditions.p + &qg.conditions.l) * &v + qg.conditions.p_perp() * &d;
        let scale = (v.norm_squared() + d.norm_squared()).sqrt().max(f64::MIN_POSITIVE);
        Ok(r.norm() / scale)
    }
}
