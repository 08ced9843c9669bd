//! Graphs shared by the criterion benchmarks in `benches/`.

use std::collections::BTreeMap;

use qgs::graph::InternalEdge;
use qgs::{ConditionKind, MetricGraph, Polynomial, Potentials, QuantumGraph};

/// `x(1 − x)`.
pub fn bump() -> Polynomial {
    Polynomial::new(vec![0.0, 1.0, -1.0])
}

pub fn dirichlet_interval(v: &Polynomial) -> QuantumGraph {
    QuantumGraph::uniform(MetricGraph::interval(1.0).unwrap(), ConditionKind::Dirichlet, v).unwrap()
}

pub fn kirchhoff_star(v: &Polynomial) -> QuantumGraph {
    let g = MetricGraph::compact_star(&[1.0, 0.75, 1.25]).unwrap();
    QuantumGraph::uniform(g, ConditionKind::Kirchhoff, v).unwrap()
}

/// A loop with a pendant edge and a δ-vertex where they meet, normalised.
pub fn lasso(v: &Polynomial) -> QuantumGraph {
    let g = MetricGraph::new(
        vec![0, 1],
        vec![
            InternalEdge { id: 0, from: 0, to: 0, length: 1.2 },
            InternalEdge { id: 1, from: 0, to: 1, length: 0.8 },
        ],
        vec![],
    )
    .unwrap();
    let kinds: BTreeMap<_, _> = [(0, ConditionKind::Delta(1.3)), (1, ConditionKind::Kirchhoff)].into_iter().collect();
    let pots = Potentials::zero().with(0, v.clone()).with(1, v.clone());
    QuantumGraph::normalized(&g, &kinds, &pots).unwrap().0
}
