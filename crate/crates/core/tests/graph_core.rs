mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use qgs::graph::{ConditionKind, GraphDescription, MetricGraph};
use qgs::linalg::{c, identity, norm2, CMat};
use qgs::secular::laplacian_smatrix;
use qgs::{Error, Polynomial, Potentials, QuantumGraph};

/// Orthogonal projector onto the span of `rank` vectors in ℂ³ and a
/// self-adjoint `L` living on its complement.
fn conditions(entries: &[f64], rank: usize) -> (CMat, CMat) {
    let m = CMat::from_fn(3, 3, |i, j| c(entries[2 * (3 * i + j)], entries[2 * (3 * i + j) + 1]));
    let q = m.qr().q();
    let cols = q.columns(0, rank).into_owned();
    let p = &cols * cols.adjoint();
    let pp = identity(3) - &p;
    let h = CMat::from_fn(3, 3, |i, j| c(entries[i + j], entries[(i * j) % 18]));
    let herm = (&h + h.adjoint()) * c(0.5, 0.0);
    (p, &pp * herm * &pp)
}

fn custom_star(p: CMat, l: CMat) -> QuantumGraph {
    let g = MetricGraph::compact_star(&STAR_LENGTHS).unwrap();
    let kinds: BTreeMap<_, _> = [(0, ConditionKind::Custom { p, l })].into_iter().collect();
    QuantumGraph::new(g, &kinds, Potentials::zero()).unwrap()
}

#[test]
fn interval_description_round_trip() {
    let text = r#"{
        "vertices": [0, 1],
        "internal_edges": [{"id": 0, "from": 0, "to": 1, "length": 1.0, "potential": [0, 1, -1]}],
        "conditions": {"0": "dirichlet", "1": {"delta": 2.5}}
    }"#;
    let desc = GraphDescription::parse(text).unwrap();
    assert_eq!(GraphDescription::parse(&desc.to_json()).unwrap(), desc);
    let qg = QuantumGraph::from_description(&desc, false).unwrap();
    assert_eq!(qg.graph.total_length(), 1.0);
    assert_eq!(qg.edge_potential(0).poly, Polynomial::new(vec![0.0, 1.0, -1.0]));
}

#[test]
fn non_projector_is_rejected_with_its_vertex() {
    let mut p = CMat::zeros(3, 3);
    p[(0, 0)] = c(0.5, 0.0);
    let g = MetricGraph::compact_star(&STAR_LENGTHS).unwrap();
    let kinds: BTreeMap<_, _> = [(0, ConditionKind::Custom { p, l: CMat::zeros(3, 3) })].into_iter().collect();
    match QuantumGraph::new(g, &kinds, Potentials::zero()) {
        Err(Error::InvalidConditions { vertex, .. }) => assert_eq!(vertex, 0),
        other => panic!("expected a vertex error, got {other:?}"),
    }
}

#[test]
fn lasso_needs_and_survives_normalisation() {
    let qg = lasso(&bump(), 0.0);
    assert!(!qg.graph.has_tadpoles());
    assert!((qg.graph.total_length() - 2.0).abs() < 1e-15);
    assert_eq!(qg.graph.e_int(), 3);
}

#[test]
fn malformed_file_reports_position() {
    let err = GraphDescription::parse("{\n  \"vertices\": [0,\n}").unwrap_err();
    assert!(err.to_string().contains("line"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertex_scattering_matrix_is_unitary(
        entries in prop::collection::vec(-1.0f64..1.0, 18),
        rank in 0usize..=3,
        k in 0.1f64..40.0,
    ) {
        let (p, l) = conditions(&entries, rank);
        let s = laplacian_smatrix(&p, &l, c(k, 0.0)).unwrap();
        prop_assert!(norm2(&(&s * s.adjoint() - identity(3))) < 1e-10);
    }

    #[test]
    fn random_conditions_build_valid_graphs(entries in prop::collection::vec(-1.0f64..1.0, 18), rank in 0usize..=3) {
        let (p, l) = conditions(&entries, rank);
        let qg = custom_star(p, l);
        prop_assert!(qg.conditions.defects().max() < 1e-12);
    }

    #[test]
    fn normalisation_keeps_the_metric(loop_len in 0.2f64..3.0, tail in 0.2f64..3.0) {
        let g = MetricGraph::new(
            vec![0, 1],
            vec![
                qgs::graph::InternalEdge { id: 0, from: 0, to: 0, length: loop_len },
                qgs::graph::InternalEdge { id: 1, from: 0, to: 1, length: tail },
            ],
            vec![],
        ).unwrap();
        let n = qgs::graph::normalize_graph(&g, &Potentials::zero()).unwrap();
        prop_assert!(!n.graph.has_tadpoles());
        prop_assert!((n.graph.total_length() - loop_len - tail).abs() < 1e-12);
    }
}
