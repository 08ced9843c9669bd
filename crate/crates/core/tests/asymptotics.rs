mod common;

use common::*;
use proptest::prelude::*;
use qgs::asymptotics::coefficients::{gamma_half_integer, heat_from_resolvent};
use qgs::asymptotics::{beta, inverse_wronskian_series, smatrix_closed_forms, smatrix_series, w_coeff, OmegaTable};
use qgs::linalg::{c, identity, max_abs, I};
use qgs::{resolvent_trace_coeffs, ConditionKind, Polynomial, Regularization};

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-4.0f64..4.0, 0..5).prop_map(Polynomial::new)
}

#[test]
fn low_order_betas() {
    let v = Polynomial::new(vec![1.0, 2.0, 3.0]);
    assert!(beta(&v, -1, true).imaginary && beta(&v, -1, true).eval(0.3) == c(0.0, 1.0));
    assert!(beta(&v, 0, false).is_zero());
    assert_eq!(beta(&v, 1, true).eval(0.5), c(0.0, -v.eval(0.5) / 2.0));
    assert_eq!(beta(&v, 1, false).eval(0.5), c(0.0, v.eval(0.5) / 2.0));
}

#[test]
fn w_coefficients() {
    let v = Polynomial::new(vec![1.0, -1.0, 2.0]);
    assert_eq!(w_coeff(&v, 0).eval(0.7), c(1.0, 0.0));
    assert!((w_coeff(&v, 1).eval(0.7) - c(v.eval(0.7) / 2.0, 0.0)).norm() < 1e-15);
    let want = -v.nth_derivative(2).eval(0.7) / 8.0 + 3.0 * v.eval(0.7).powi(2) / 8.0;
    assert!((w_coeff(&v, 2).eval(0.7) - c(want, 0.0)).norm() < 1e-14);
    assert!((1..5).all(|l| w_coeff(&Polynomial::zero(), l).is_zero()));
}

#[test]
fn inverse_wronskian_leading_terms() {
    let v = Polynomial::new(vec![0.5, 1.0, -2.0]);
    let s = inverse_wronskian_series(&v, 3);
    let at = |p: i32| s.iter().find(|(q, _)| *q == p).map(|(_, c)| c.eval(0.4)).unwrap();
    let x = 0.4;
    assert!((at(1) + c(1.0, 0.0) / (2.0 * I)).norm() < 1e-15);
    assert!((at(3) + c(v.eval(x), 0.0) / (4.0 * I)).norm() < 1e-15);
    let want = c(v.nth_derivative(2).eval(x) - 3.0 * v.eval(x).powi(2), 0.0) / (16.0 * I);
    assert!((at(5) - want).norm() < 1e-14);
}

#[test]
fn heat_coefficients_of_intervals() {
    let n = resolvent_trace_coeffs(&interval(ConditionKind::Neumann, &Polynomial::zero()), Regularization::Neumann);
    assert!((n.b[0] - c(0.0, 0.5)).norm() < 1e-15);
    assert!((n.a[1].re - 0.5).abs() < 1e-15);
    let k = resolvent_trace_coeffs(&kirchhoff_star(&Polynomial::zero()), Regularization::Neumann);
    assert!(k.a[2..].iter().all(|a| a.norm() == 0.0));
}

#[test]
fn lasso_with_potential_has_full_table() {
    let co = resolvent_trace_coeffs(&lasso(&Polynomial::new(vec![1.0, 2.0, -1.5]), 1.3), Regularization::Neumann);
    assert!(co.b.iter().all(|b| b.norm() > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_parity_and_units(v in poly(), l in 1i32..8) {
        let p = beta(&v, l, true);
        let m = beta(&v, l, false);
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(&p, &m.scale(sign));
        prop_assert_eq!(p.imaginary, l % 2 != 0);
    }

    #[test]
    fn heat_and_resolvent_coefficients_are_linked(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let b = c(re, im);
        prop_assert_eq!(heat_from_resolvent(2, b), -b);
        prop_assert_eq!(heat_from_resolvent(4, b), b);
        prop_assert!((heat_from_resolvent(1, b) - (-I * b / gamma_half_integer(0))).norm() < 1e-15);
        prop_assert!((heat_from_resolvent(3, b) - I * b / gamma_half_integer(1)).norm() < 1e-15);
        prop_assert!((heat_from_resolvent(5, b) - (-I * b / gamma_half_integer(2))).norm() < 1e-15);
    }

    #[test]
    fn series_matches_closed_forms_on_random_graphs(v in poly(), alpha in -3.0f64..3.0) {
        let qg = delta_star(&v, alpha);
        let s = smatrix_series(&qg, 3);
        for (got, want) in s.terms.iter().zip(smatrix_closed_forms(&qg).iter()) {
            prop_assert!(max_abs(&(got - want)) <= 1e-12 * (1.0 + max_abs(want)));
        }
        prop_assert_eq!(&OmegaTable::new(&qg, 3).omega[0], &identity(qg.graph.e()));
    }

    #[test]
    fn first_coefficients_ignore_the_potential(v in poly()) {
        let free = resolvent_trace_coeffs(&kirchhoff_star(&Polynomial::zero()), Regularization::Neumann);
        let with = resolvent_trace_coeffs(&kirchhoff_star(&v), Regularization::Neumann);
        prop_assert_eq!(free.b[0], with.b[0]);
        prop_assert_eq!(free.b[1], with.b[1]);
    }
}
