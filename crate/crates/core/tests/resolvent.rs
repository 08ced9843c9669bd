mod common;

use common::*;
use proptest::prelude::*;
use qgs::linalg::c;
use qgs::resolvent::{resolvent_kernel, star_kernel};
use qgs::{
    regularized_trace, resolvent_trace_coeffs, ConditionKind, Error, GraphPoint, MetricGraph, Polynomial, QuantumGraph,
    Regularization, TraceOptions,
};

/// `Σ_n 1/(n²π² + a²)` in closed form.
fn dirichlet_sum(a: f64) -> f64 {
    (a / a.tanh() - 1.0) / (2.0 * a * a)
}

#[test]
fn constant_potential_on_a_dirichlet_interval() {
    let opts = TraceOptions::default();
    for (cst, kappa) in [(0.0, 2.0), (2.5, 3.0), (-4.0, 4.5), (7.0, 1.5)] {
        let qg = interval(ConditionKind::Dirichlet, &Polynomial::constant(cst));
        let got = regularized_trace(&qg, Regularization::Neumann, c(0.0, kappa), &opts).unwrap();
        let want = dirichlet_sum((kappa * kappa + cst).sqrt());
        assert!((got.re - want).abs() < 1e-11 * want.abs(), "c = {cst}, κ = {kappa}: {got} vs {want}");
        assert!(got.im.abs() < 1e-12);
    }
}

#[test]
fn decoupled_dirichlet_half_lines_have_zero_regularised_trace() {
    let qg = QuantumGraph::uniform(MetricGraph::external_star(3).unwrap(), ConditionKind::Dirichlet, &Polynomial::zero())
        .unwrap();
    for kappa in [0.5, 2.0, 9.0] {
        let tr = regularized_trace(&qg, Regularization::Dirichlet, c(0.0, kappa), &TraceOptions::default()).unwrap();
        assert!(tr.norm() < 1e-14, "κ = {kappa}: {tr}");
    }
}

#[test]
fn kirchhoff_half_lines_are_exactly_second_order() {
    let qg = external_star();
    for reg in [Regularization::Neumann, Regularization::Dirichlet] {
        let b2 = resolvent_trace_coeffs(&qg, reg).b[1];
        for kappa in [0.7, 3.0, 12.0] {
            let k = c(0.0, kappa);
            let tr = regularized_trace(&qg, reg, k, &TraceOptions::default()).unwrap();
            let want = b2 / (k * k);
            assert!((tr - want).norm() < 1e-13 * want.norm(), "{reg:?} κ = {kappa}: {tr} vs {want}");
        }
    }
}

#[test]
fn half_line_kernel_reflects_with_the_right_sign() {
    let k = c(0.0, 2.0);
    assert!(star_kernel(Regularization::Dirichlet, k, true, 0.0, 0.7).norm() < 1e-16);
    assert_eq!(star_kernel(Regularization::Neumann, k, false, 0.3, 0.7), c(0.0, 0.0));
}

#[test]
fn real_eigenvalue_is_reported_as_near_spectrum() {
    let qg = interval(ConditionKind::Dirichlet, &Polynomial::zero());
    let err = resolvent_kernel(&qg, c(std::f64::consts::PI, 0.0), GraphPoint::new(0, 0.3), GraphPoint::new(0, 0.6))
        .unwrap_err();
    assert!(matches!(err, Error::NearSpectrum { .. }), "{err}");
}

fn point(qg: &QuantumGraph, edge: usize, s: f64) -> GraphPoint {
    let edges = qg.graph.internal_edges();
    let e = &edges[edge % edges.len()];
    GraphPoint::new(e.id, s * e.length)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_symmetric(
        e1 in 0usize..3, s1 in 0.01f64..0.99,
        e2 in 0usize..3, s2 in 0.01f64..0.99,
        kappa in 0.5f64..15.0,
        alpha in -1.0f64..3.0,
    ) {
        let qg = lasso(&Polynomial::new(vec![1.0, 2.0, -1.5]), alpha);
        let (x, y) = (point(&qg, e1, s1), point(&qg, e2, s2));
        let k = c(0.0, kappa);
        let xy = resolvent_kernel(&qg, k, x, y).unwrap();
        let yx = resolvent_kernel(&qg, k, y, x).unwrap();
        prop_assert!((xy - yx).norm() <= 1e-10 * xy.norm().max(1e-8), "{xy} vs {yx}");
        prop_assert!(xy.im.abs() <= 1e-10 * xy.norm().max(1e-8));
    }
}
