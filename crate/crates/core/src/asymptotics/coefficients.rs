//! Coefficients of the regularised resolvent trace, `Σ b_n k^{−n}`, and of the
//! heat trace, `Σ a_n t^{n/2−1}`.

use serde::Serialize;

use crate::linalg::{c, pow, trace, C64, I};
use crate::quantum::QuantumGraph;
use crate::resolvent::Regularization;

/// Number of trace coefficients available in closed form.
pub const MAX_TRACE_ORDER: usize = 5;

/// `Γ(n + ½) = (2n)! √π / (4ⁿ n!)`.
pub fn gamma_half_integer(n: u32) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for j in 1..=n {
        g *= (2 * j - 1) as f64 / 2.0;
    }
    g
}

/// `a_n` from `b_n`: `a_{2m} = (−1)^m b_{2m}/(m−1)!`,
/// `a_{2m+1} = i(−1)^{m+1} b_{2m+1}/Γ(m+½)`.
pub fn heat_from_resolvent(n: usize, b: C64) -> C64 {
    assert!(n >= 1);
    let m = (n / 2) as u32;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    if n.is_multiple_of(2) {
        let fact: f64 = (1..m).map(|j| j as f64).product();
        b * (sign / fact)
    } else {
        I * b * (-sign / gamma_half_integer(m))
    }
}

/// Coefficients `[k⁰, …, k⁻⁵]` of `(1/W)∫u⁺²` (`minus = false`, data at
/// `x = 0`) or of the `u⁻` analogue (data at `x = l`).
pub fn vertex_integral_series(v: &crate::potential::EdgePotential, minus: bool) -> [C64; 6] {
    let d = v.poly.derivative();
    let (value, slope) = if minus {
        (v.at_end(true), -d.eval(v.length))
    } else {
        (v.at_end(false), d.eval(0.0))
    };
    let mut s = [C64::new(0.0, 0.0); 6];
    s[2] = c(-0.25, 0.0);
    s[4] = c(-value / 4.0, 0.0);
    s[5] = c(slope / 8.0, 0.0) / I;
    s
}

/// `b_1, …, b_5` together with the `a_n` they induce.
#[derive(Clone, Debug, Serialize)]
pub struct TraceCoefficients {
    pub regularization: &'static str,
    /// `b[n − 1]` is `b_n`.
    pub b: [C64; MAX_TRACE_ORDER],
    /// `a[n − 1]` is `a_n`.
    pub a: [C64; MAX_TRACE_ORDER],
    /// `a_3` without the `1/√π` factor, kept for comparison.
    pub a3_without_sqrt_pi: C64,
}

impl TraceCoefficients {
    /// `Σ_{n ≤ order} b_n k^{−n}`.
    pub fn resolvent_partial_sum(&self, k: C64, order: usize) -> C64 {
        (1..=order.min(MAX_TRACE_ORDER)).map(|n| self.b[n - 1] * k.powi(-(n as i32))).sum()
    }

    /// `Σ_{n ≤ order} a_n t^{n/2 − 1}` (real part; the `a_n` are real).
    pub fn heat_partial_sum(&self, t: f64, order: usize) -> f64 {
        heat_partial_sum(&self.a, t, order)
    }
}

/// `Σ_{n ≤ order} a_n t^{n/2 − 1}` for an arbitrary coefficient list.
pub fn heat_partial_sum(a: &[C64], t: f64, order: usize) -> f64 {
    a.iter().take(order).enumerate().map(|(i, an)| an.re * t.powf((i as f64 + 1.0) / 2.0 - 1.0)).sum()
}

/// Boundary value and inward derivative of the potential at every slot
/// (zero on external slots).
fn slot_data(qg: &QuantumGraph) -> (Vec<f64>, Vec<f64>) {
    let g = &qg.graph;
    let n = g.e();
    let mut value = vec![0.0; n];
    let mut slope = vec![0.0; n];
    for (j, v) in qg.edge_potentials().iter().enumerate() {
        let (s0, sl) = g.internal_slots(j);
        for (s, finish) in [(s0, false), (sl, true)] {
            value[s] = v.at_end(finish);
            slope[s] = v.derivative_from_vertex(finish);
        }
    }
    (value, slope)
}

/// `b_1, …, b_5` of `tr(R_H − J R_{D/N} J*) ~ Σ b_n k^{−n}`.
pub fn resolvent_trace_coeffs(qg: &QuantumGraph, reg: Regularization) -> TraceCoefficients {
    let g = &qg.graph;
    let n = g.e();
    let p = &qg.conditions.p;
    let l = &qg.conditions.l;
    let pp = qg.conditions.p_perp();
    let s_inf_diag: Vec<f64> = (0..n).map(|s| 1.0 - 2.0 * p[(s, s)].re).collect();
    let e_ex = g.external_edges().len() as f64;
    let (value, slope) = slot_data(qg);

    let int_v: f64 = qg.edge_potentials().iter().map(|v| v.total()).sum();
    let int_v2_dd: f64 = qg
        .edge_potentials()
        .iter()
        .map(|v| {
            let sq = &v.poly * &v.poly;
            let dd = v.poly.nth_derivative(2);
            dd.integrate(0.0, v.length) - 3.0 * sq.integrate(0.0, v.length)
        })
        .sum();
    let sum = |f: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(f).sum() };

    let b1 = I * (g.total_length() / 2.0);
    let b2 = c(-s_inf_diag.iter().sum::<f64>() / 4.0 + reg.reflection() * e_ex / 4.0, 0.0);
    let b3 = (c(-int_v / 4.0, 0.0) + trace(l) / 2.0) / I;
    let b4 = c(-sum(&|s| s_inf_diag[s] * value[s]) / 4.0, 0.0) + trace(&pow(l, 2)) / 2.0;
    let b5 = (c(int_v2_dd / 16.0, 0.0)
        + c(sum(&|s| s_inf_diag[s] * slope[s]) / 8.0, 0.0)
        + c(sum(&|s| l[(s, s)].re * value[s]) * 0.75, 0.0)
        - trace(&pow(l, 3)) / 2.0
        + c(sum(&|s| pp[(s, s)].re * slope[s]) / 8.0, 0.0))
        / I;
    let b = [b1, b2, b3, b4, b5];
    let a: [C64; MAX_TRACE_ORDER] = std::array::from_fn(|i| heat_from_resolvent(i + 1, b[i]));
    TraceCoefficients {
        regularization: reg.label(),
        b,
        a,
        a3_without_sqrt_pi: a[2] * std::f64::consts::PI.sqrt(),
    }
}

/// `b_5` with the opposite sign of the `P⊥ V′` vertex term.
pub fn b5_flipped_projector_term(qg: &QuantumGraph, coeffs: &TraceCoefficients) -> C64 {
    let pp = qg.conditions.p_perp();
    let (_, slope) = slot_data(qg);
    let term: f64 = (0..qg.graph.e()).map(|s| pp[(s, s)].re * slope[s]).sum::<f64>() / 8.0;
    coeffs.b[4] - c(2.0 * term, 0.0) / I
}
