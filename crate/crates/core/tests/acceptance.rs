//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line with
//! the measured quantity next to its pinned tolerance.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use qgs::asymptotics::coefficients::b5_flipped_projector_term;
use qgs::asymptotics::{smatrix_closed_forms, smatrix_series, BetaTable, IPoly};
use qgs::graph::{EdgeRef, GraphPoint};
use qgs::heat::{
    heat_residuals, numeric_heat_trace, resolvent_residuals, resolvent_traces, spectrum_for_times,
    weyl_resolvent_tail,
};
use qgs::linalg::{c, identity, max_abs, norm2, singular_values, C64};
use qgs::resolvent::{apply_resolvent, GraphFunction};
use qgs::secular::SecularMatrices;
use qgs::{
    find_eigenvalues, regularized_trace, resolvent_trace_coeffs, ConditionKind, Normalisation,
    Polynomial, QuantumGraph, Regularization, SpectrumOptions, Tolerances, TraceOptions,
};
use rand::{Rng, SeedableRng};

fn report(id: u32, what: &str, pass: bool, detail: String) {
    println!("{} [{id:>2}] {what}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "[{id}] {what}: {detail}");
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

#[test]
fn free_dirichlet_interval_eigenvalues() {
    let start = Instant::now();
    let qg = interval(ConditionKind::Dirichlet, &Polynomial::zero());
    let spec = find_eigenvalues(&qg, (50.5 * PI).powi(2), &SpectrumOptions::default()).unwrap();
    let lambdas = spec.lambdas();
    let worst = (1..=50)
        .map(|n| {
            let want = (n as f64 * PI).powi(2);
            lambdas.get(n - 1).map_or(f64::INFINITY, |l| (l - want).abs() / want)
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        1,
        "free Dirichlet interval, 50 eigenvalues",
        lambdas.len() == 50 && worst <= 1e-8 && within(elapsed, 5),
        format!("{} found, max rel err {worst:.2e} (≤ 1e-8), {elapsed:.2?} (≤ 5 s)", lambdas.len()),
    );
}

#[test]
fn unitarity_of_secular_matrix() {
    let start = Instant::now();
    let graphs = [
        ("Dirichlet interval", interval(ConditionKind::Dirichlet, &bump())),
        ("Kirchhoff 3-star", kirchhoff_star(&bump())),
        ("lasso", lasso(&bump(), 0.0)),
    ];
    let mut worst = 0.0f64;
    for (_, qg) in &graphs {
        for k in 1..=50 {
            let u = SecularMatrices::plane_wave(qg, c(k as f64, 0.0)).unwrap().u();
            let n = u.nrows();
            worst = worst.max(norm2(&(&u * u.adjoint() - identity(n))));
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "‖UU* − 1‖ on interval, star and lasso",
        worst <= 1e-10 && within(elapsed, 10),
        format!("max defect {worst:.2e} (≤ 1e-10), {elapsed:.2?} (≤ 10 s)"),
    );
}

/// Positive roots of `det Z` from a direct scan of `σ_min(Z)/σ_max(Z)`.
fn z_roots(qg: &QuantumGraph, k_max: f64) -> Vec<f64> {
    let ratio = |k: f64| {
        let s = singular_values(&SecularMatrices::plane_wave(qg, c(k, 0.0)).unwrap().z());
        (s[s.len() - 1] / s[0], s)
    };
    let h = PI / (32.0 * qg.graph.total_length());
    let ks: Vec<f64> = (1..).map(|i| i as f64 * h).take_while(|k| *k <= k_max + h).collect();
    let f: Vec<f64> = ks.iter().map(|&k| ratio(k).0).collect();
    let mut roots = Vec::new();
    for i in 1..ks.len() - 1 {
        if f[i] <= f[i - 1] && f[i] < f[i + 1] {
            let (mut a, mut b) = (ks[i - 1], ks[i + 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            while b - a > 1e-14 * b {
                let (x1, x2) = (b - g * (b - a), a + g * (b - a));
                if ratio(x1).0 < ratio(x2).0 {
                    b = x2;
                } else {
                    a = x1;
                }
            }
            let k = 0.5 * (a + b);
            let (r, s) = ratio(k);
            if r < 1e-8 && k <= k_max {
                let mult = s.iter().filter(|x| **x / s[0] < 1e-6).count();
                roots.extend(std::iter::repeat_n(k, mult));
            }
        }
    }
    roots
}

#[test]
fn secular_determinants_share_roots() {
    let graphs = [
        ("interval", interval(ConditionKind::Dirichlet, &bump())),
        ("star", kirchhoff_star(&bump())),
        ("lasso", lasso(&bump(), 0.0)),
    ];
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    let mut same = true;
    for (name, qg) in &graphs {
        let spec = find_eigenvalues(qg, 400.0, &SpectrumOptions::default()).unwrap();
        let from_u: Vec<f64> = spec
            .eigenvalues
            .iter()
            .filter(|e| e.lambda > 0.0)
            .flat_map(|e| std::iter::repeat_n(e.k.re, e.multiplicity))
            .collect();
        let from_z = z_roots(qg, 20.0);
        same &= from_u.len() == from_z.len();
        counts.push(format!("{name} {}/{}", from_z.len(), from_u.len()));
        for (a, b) in from_u.iter().zip(&from_z) {
            worst = worst.max((a - b).abs());
        }
    }
    report(
        3,
        "roots of det Z and det(1 − U) on (0, 20]",
        same && worst <= 1e-8,
        format!("counts {} , max |Δk| {worst:.2e} (≤ 1e-8)", counts.join(", ")),
    );
}

#[test]
fn beta_closed_forms() {
    let mut ok = true;
    for v in [bump(), Polynomial::new(vec![2.0, 3.0])] {
        let t = BetaTable::new(&v, 4);
        let d1 = v.derivative();
        let d2 = v.nth_derivative(2);
        let d3 = v.nth_derivative(3);
        let sq = &v * &v;
        let b2 = IPoly::real(d1.scale(0.25));
        let b3 = IPoly::imag(&d2.scale(0.125) - &sq.scale(0.125));
        let b4 = IPoly::real(&d3.scale(-1.0 / 16.0) + &(&d1 * &v).scale(0.25));
        for plus in [true, false] {
            let sign = if plus { 1.0 } else { -1.0 };
            ok &= *t.beta(2, plus) == b2;
            ok &= *t.beta(3, plus) == b3.scale(sign);
            ok &= *t.beta(4, plus) == b4;
        }
    }
    report(4, "β₂, β₃, β₄ closed forms", ok, "coefficient-wise equality for x(1 − x) and 2 + 3x".into());
}

#[test]
fn smatrix_expansion() {
    let start = Instant::now();
    let v = Polynomial::new(vec![2.0, 3.0, -1.0]);
    let qg = delta_star(&v, 1.5);
    let series = smatrix_series(&qg, 3);
    let closed = smatrix_closed_forms(&qg);
    let symbolic = (0..3)
        .map(|m| max_abs(&(&series.terms[m] - &closed[m])) / (1.0 + max_abs(&closed[m])))
        .fold(0.0, f64::max);
    let ks = [20.0, 40.0, 80.0, 160.0, 320.0];
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .map(|&k| {
            let m = SecularMatrices::assemble(&qg, c(k, 0.0), Normalisation::default(), Tolerances::tight()).unwrap();
            (k.ln(), norm2(&(&m.s - series.partial_sum(c(k, 0.0), 3))).ln())
        })
        .collect();
    let slope = fit(&pts);
    let elapsed = start.elapsed();
    report(
        5,
        "𝔖-matrix expansion",
        symbolic <= 1e-12 && slope <= -3.7 && within(elapsed, 30),
        format!("closed-form mismatch {symbolic:.1e} (≤ 1e-12), slope {slope:.3} (≤ −3.7), {elapsed:.2?}"),
    );
}

fn fit(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn regularized_trace_on_interval() {
    let start = Instant::now();
    let kappa: f64 = 5.0;
    let k = c(0.0, kappa);
    let opts = TraceOptions::default();
    let free = interval(ConditionKind::Dirichlet, &Polynomial::zero());
    let got = regularized_trace(&free, Regularization::Neumann, k, &opts).unwrap();
    let want = (kappa / kappa.tanh() - 1.0) / (2.0 * kappa * kappa);
    let err_free = (got - c(want, 0.0)).norm();

    let qg = interval(ConditionKind::Dirichlet, &bump());
    let got = regularized_trace(&qg, Regularization::Neumann, k, &opts).unwrap();
    let spec = find_eigenvalues(&qg, (60.5 * PI).powi(2), &SpectrumOptions::default()).unwrap();
    let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let lambdas = spec.lambdas();
    let sum: f64 = lambdas.iter().rev().map(|l| 1.0 / (l + kappa * kappa)).sum::<f64>()
        + weyl_resolvent_tail(&qg, &co, lambdas.len(), kappa);
    let err_v = (got - c(sum, 0.0)).norm();
    let elapsed = start.elapsed();
    report(
        6,
        "regularised trace at κ = 5",
        err_free <= 1e-8 && err_v <= 1e-6 && within(elapsed, 30),
        format!("coth form {err_free:.1e} (≤ 1e-8), V = x(1−x) vs eigen sum + tail {err_v:.1e} (≤ 1e-6), {elapsed:.2?}"),
    );
}

#[test]
fn resolvent_trace_residual_slopes() {
    let start = Instant::now();
    let opts = TraceOptions::default();
    let kappas = [8.0, 16.0, 32.0, 64.0];
    let qg = lasso(&Polynomial::new(vec![1.0, 2.0, -1.5]), 1.3);
    let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let traces = resolvent_traces(&qg, Regularization::Neumann, &kappas, &opts).unwrap();
    let compact = resolvent_residuals(&co.b, &kappas, &traces, 5);

    let mut flipped = co.b;
    flipped[4] = b5_flipped_projector_term(&qg, &co);
    let control = resolvent_residuals(&flipped, &kappas, &traces, 5);

    let star = external_star();
    let co_star = resolvent_trace_coeffs(&star, Regularization::Neumann);
    let tr_star = resolvent_traces(&star, Regularization::Neumann, &kappas, &opts).unwrap();
    let open = resolvent_residuals(&co_star.b, &kappas, &tr_star, 2);
    let elapsed = start.elapsed();
    let show = |s: Option<f64>| s.map_or("exact".to_string(), |s| format!("{s:.3}"));
    println!(
        "     [ 7] control: opposite sign of the P⊥V′ term in b₅ gives slope {} ({})",
        show(control.fit.slope),
        if control.fit.pass { "passes" } else { "fails" }
    );
    report(
        7,
        "resolvent trace residual slopes",
        compact.fit.pass && open.fit.pass && within(elapsed, 120),
        format!(
            "lasso N=5 slope {} (≥ 5.6), external star N=2 slope {} (≥ 2.8), {elapsed:.2?}",
            show(compact.fit.slope),
            show(open.fit.slope)
        ),
    );
}

#[test]
fn heat_trace_leading_terms() {
    let start = Instant::now();
    let t = 0.05;
    let mut worst = 0.0f64;
    let mut oracle = 0.0f64;
    for (kind, sign, first) in [(ConditionKind::Neumann, 1.0, 0), (ConditionKind::Dirichlet, -1.0, 1)] {
        let qg = interval(kind, &Polynomial::zero());
        let spec = spectrum_for_times(&qg, t, 1e-12).unwrap();
        let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
        let s = numeric_heat_trace(&qg, &spec, t, 1e-12, Some(&co)).unwrap();
        let lead = 1.0 / (4.0 * PI * t).sqrt() + sign * 0.5;
        worst = worst.max((s.value - lead).abs()).max((s.partial_sums[1] - lead).abs());
        oracle = oracle.max((s.value - theta(t, first)).abs());
    }
    let elapsed = start.elapsed();
    report(
        8,
        "heat trace 1/√(4πt) ± 1/2 at t = 0.05",
        worst <= 1e-6 && oracle <= 1e-10 && within(elapsed, 30),
        format!("max deviation {worst:.1e} (≤ 1e-6), theta oracle {oracle:.1e} (≤ 1e-10), {elapsed:.2?}"),
    );
}

fn times() -> Vec<f64> {
    (4..=9).map(|m| 2f64.powi(-m)).collect()
}

#[test]
fn kirchhoff_higher_heat_coefficients_vanish() {
    let start = Instant::now();
    let qg = kirchhoff_star(&Polynomial::zero());
    let ts = times();
    let spec = spectrum_for_times(&qg, ts[ts.len() - 1], 1e-13).unwrap();
    let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let vanish = co.a[2..].iter().all(|a| a.norm() == 0.0);
    let mut lines = Vec::new();
    let mut ok = vanish;
    for n in 1..=5 {
        let tab = heat_residuals(&qg, &spec, &co.a, &ts, n, 1e-13).unwrap();
        ok &= tab.fit.pass;
        lines.push(format!("N={n}: {}", tab.fit.slope.map_or("exact".into(), |s| format!("{s:.2}"))));
    }
    let elapsed = start.elapsed();
    report(
        9,
        "Kirchhoff star, V = 0, a₃ = a₄ = a₅ = 0",
        ok && within(elapsed, 60),
        format!("coefficients vanish: {vanish}; slopes {}; {elapsed:.2?}", lines.join(", ")),
    );
}

#[test]
fn a3_normalisation_experiment() {
    let qg = interval(ConditionKind::Dirichlet, &bump());
    let ts = times();
    let spec = spectrum_for_times(&qg, ts[ts.len() - 1], 1e-13).unwrap();
    let co = resolvent_trace_coeffs(&qg, Regularization::Neumann);
    let mut without = co.a;
    without[2] = co.a3_without_sqrt_pi;
    let with_fit = heat_residuals(&qg, &spec, &co.a, &ts, 3, 1e-13).unwrap().fit;
    let without_fit = heat_residuals(&qg, &spec, &without, &ts, 3, 1e-13).unwrap().fit;
    let winner = match (with_fit.pass, without_fit.pass) {
        (true, false) => "a₃ = (−½∫V + tr L)/√π",
        (false, true) => "a₃ = −½∫V + tr L",
        _ => "undecided",
    };
    report(
        10,
        "a₃ normalisation",
        with_fit.pass != without_fit.pass,
        format!(
            "with 1/√π slope {:.3}, without slope {:.3} (≥ 0.85); selected {winner}",
            with_fit.slope.unwrap_or(f64::NAN),
            without_fit.slope.unwrap_or(f64::NAN)
        ),
    );
}

#[test]
fn star_matches_finite_difference_oracle() {
    let start = Instant::now();
    let v = bump();
    let qg = kirchhoff_star(&v);
    let spec = find_eigenvalues(&qg, 205.0, &SpectrumOptions::default()).unwrap();
    let ours: Vec<f64> = spec.lambdas().into_iter().filter(|l| *l <= 200.0).collect();
    let oracle: Vec<f64> = star_oracle(&STAR_LENGTHS, &v, 200.0, 80).into_iter().filter(|l| *l <= 200.0).collect();
    let worst = ours.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    report(
        11,
        "3-star against finite differences",
        ours.len() == oracle.len() && worst <= 1e-6 && within(elapsed, 120),
        format!("{} / {} eigenvalues ≤ 200, max |Δλ| {worst:.1e} (≤ 1e-6), {elapsed:.2?}", ours.len(), oracle.len()),
    );
}

/// Sixth-order central second difference.
const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];

#[test]
fn resolvent_identity_on_random_functions() {
    let start = Instant::now();
    let k = c(0.0, 3.0);
    let opts = TraceOptions::default();
    let graphs = [
        interval(ConditionKind::Dirichlet, &bump()),
        kirchhoff_star(&bump()),
        lasso(&bump(), 0.7),
        external_star(),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let qg = &graphs[i % graphs.len()];
        let g = &qg.graph;
        let mut psi = GraphFunction::new(40.0);
        for e in g.internal_edges() {
            let l = e.length;
            let a: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..PI))).collect();
            psi = psi.with(e.id, move |x| {
                c(a.iter().enumerate().map(|(j, (amp, ph))| amp * (j as f64 * PI * x / l + ph).cos()).sum(), 0.0)
            });
        }
        for e in g.external_edges() {
            let (amp, freq, off) = (rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
            psi = psi.with(e.id, move |x| c(amp * (-x).exp() * ((freq * x).cos() + off), 0.0));
        }
        let mut sup = 0.0f64;
        let mut centres = Vec::new();
        for e in g.internal_edges() {
            for j in 0..=200 {
                sup = sup.max(psi.eval(GraphPoint::new(e.id, e.length * j as f64 / 200.0)).norm());
            }
            centres.push((e.id, e.length, rng.random_range(0.25..0.75) * e.length));
        }
        for e in g.external_edges() {
            for j in 0..=400 {
                sup = sup.max(psi.eval(GraphPoint::new(e.id, j as f64 / 40.0)).norm());
            }
            centres.push((e.id, 4.0, rng.random_range(0.5..3.0)));
        }
        let delta = 0.008;
        let mut points = Vec::new();
        for &(edge, _, x) in &centres {
            points.extend((-3..=3).map(|m| GraphPoint::new(edge, x + m as f64 * delta)));
        }
        let u = apply_resolvent(qg, k, &psi, &points, &opts).unwrap();
        for (n, &(edge, _, x)) in centres.iter().enumerate() {
            let w = &u[7 * n..7 * n + 7];
            let d2: C64 = w.iter().zip(D2).map(|(u, d)| u * d).sum::<C64>() / (delta * delta);
            let v = match g.edge_ref(edge).unwrap() {
                EdgeRef::Internal(j) => qg.edge_potential(j).poly.eval(x),
                EdgeRef::External(_) => 0.0,
            };
            let h_u = -d2 + w[3] * (v - (k * k).re);
            worst = worst.max((h_u - psi.eval(GraphPoint::new(edge, x))).norm() / sup);
        }
    }
    let elapsed = start.elapsed();
    report(
        12,
        "(H − k²)R ψ = ψ at k = 3i, 20 random ψ",
        worst <= 1e-6 && within(elapsed, 60),
        format!("max relative residual {worst:.1e} (≤ 1e-6), {elapsed:.2?}"),
    );
}
