use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{
    normalize_graph, ConditionKind, GraphDescription, MetricGraph, Normalized, VertexConditions,
    VertexId,
};
use crate::potential::{EdgePotential, Polynomial, Potentials};

/// A normalised metric graph with vertex conditions and edge potentials:
/// everything needed to define `H = −Δ + V`.
#[derive(Clone, Debug)]
pub struct QuantumGraph {
    pub graph: MetricGraph,
    pub conditions: VertexConditions,
    pub potentials: Potentials,
    edge_potentials: Vec<EdgePotential>,
}

impl QuantumGraph {
    /// Builds from local condition kinds. The graph must already be
    /// normalised (no loops, no potentials on external edges).
    pub fn new(
        graph: MetricGraph,
        kinds: &BTreeMap<VertexId, ConditionKind>,
        potentials: Potentials,
    ) -> Result<Self> {
        let conditions = VertexConditions::standard(&graph, kinds)?;
        QuantumGraph::with_conditions(graph, conditions, potentials)
    }

    /// Builds from assembled (possibly non-local) conditions.
    pub fn with_conditions(
        graph: MetricGraph,
        conditions: VertexConditions,
        potentials: Potentials,
    ) -> Result<Self> {
        if graph.has_tadpoles() {
            return Err(Error::NeedsNormalisation(format!(
                "edges {:?} are loops; normalise the graph first",
                graph.tadpoles()
            )));
        }
        if potentials.has_external() {
            return Err(Error::NeedsNormalisation(
                "external edges carry a potential; normalise the graph first".into(),
            ));
        }
        if conditions.p.nrows() != graph.e() {
            return Err(Error::InvalidGraph(format!(
                "conditions have dimension {} but the graph has {} boundary slots",
                conditions.p.nrows(),
                graph.e()
            )));
        }
        for id in potentials.internal.keys() {
            graph.internal_edge(*id)?;
        }
        let edge_potentials = graph
            .internal_edges()
            .iter()
            .map(|e| EdgePotential::new(potentials.internal_poly(e.id), e.length))
            .collect();
        Ok(QuantumGraph { graph, conditions, potentials, edge_potentials })
    }

    /// Normalises first, then builds.
    pub fn normalized(
        graph: &MetricGraph,
        kinds: &BTreeMap<VertexId, ConditionKind>,
        potentials: &Potentials,
    ) -> Result<(Self, Normalized)> {
        let n = normalize_graph(graph, potentials)?;
        let kinds = n.remap_kinds(kinds)?;
        let qg = QuantumGraph::new(n.graph.clone(), &kinds, n.potentials.clone())?;
        Ok((qg, n))
    }

    pub fn from_description(desc: &GraphDescription, normalize: bool) -> Result<Self> {
        let (graph, potentials, kinds) = desc.build()?;
        if normalize {
            Ok(QuantumGraph::normalized(&graph, &kinds, &potentials)?.0)
        } else {
            QuantumGraph::new(graph, &kinds, potentials)
        }
    }

    /// Same condition kind at every vertex and the same polynomial on every
    /// internal edge.
    pub fn uniform(graph: MetricGraph, kind: ConditionKind, poly: &Polynomial) -> Result<Self> {
        let kinds = graph.vertices().iter().map(|&v| (v, kind.clone())).collect();
        let pots = Potentials::uniform(graph.internal_edges().iter().map(|e| e.id), poly);
        QuantumGraph::new(graph, &kinds, pots)
    }

    /// Potential of the `j`-th internal edge (sorted by id).
    pub fn edge_potential(&self, j: usize) -> &EdgePotential {
        &self.edge_potentials[j]
    }

    pub fn edge_potentials(&self) -> &[EdgePotential] {
        &self.edge_potentials
    }

    /// Bounds of `V` over the whole graph (external edges contribute 0).
    pub fn potential_range(&self) -> (f64, f64) {
        let init = if self.graph.is_compact() { (f64::INFINITY, f64::NEG_INFINITY) } else { (0.0, 0.0) };
        self.edge_potentials.iter().fold(init, |(lo, hi), v| {
            let (a, b) = v.range();
            (lo.min(a), hi.max(b))
        })
    }

    pub fn is_compact(&self) -> bool {
        self.graph.is_compact()
    }
}
