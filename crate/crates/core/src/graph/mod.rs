//! Metric graphs, boundary slot layout and vertex conditions.
//!
//! Boundary vectors are laid out as (external ends, internal `x = 0` ends,
//! internal `x = l` ends), each group in ascending edge id.

mod conditions;
mod description;
mod distance;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conditions::{ConditionKind, VertexBlock, VertexConditions, CUSTOM_TOLERANCE};
pub use description::{CustomMatrices, GraphDescription, KindDescription};
pub use normalize::{normalize_graph, Normalized};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalEdge {
    pub id: EdgeId,
    /// Vertex at `x = 0`.
    pub from: VertexId,
    /// Vertex at `x = l`.
    pub to: VertexId,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalEdge {
    pub id: EdgeId,
    pub at: VertexId,
}

/// Which end of an edge a boundary slot refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum End {
    /// The single end of an external edge.
    External,
    /// `x = 0` of an internal edge.
    Start,
    /// `x = l` of an internal edge.
    Finish,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    pub end: End,
}

impl EdgeEnd {
    pub fn new(edge: EdgeId, end: End) -> Self {
        EdgeEnd { edge, end }
    }
}

/// Bijection between the `E` boundary slots and edge ends.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryIndex {
    slots: Vec<EdgeEnd>,
    lookup: BTreeMap<EdgeEnd, usize>,
}

impl BoundaryIndex {
    fn new(internal: &[InternalEdge], external: &[ExternalEdge]) -> Self {
        let slots: Vec<EdgeEnd> = external
            .iter()
            .map(|e| EdgeEnd::new(e.id, End::External))
            .chain(internal.iter().map(|e| EdgeEnd::new(e.id, End::Start)))
            .chain(internal.iter().map(|e| EdgeEnd::new(e.id, End::Finish)))
            .collect();
        let lookup = slots.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        BoundaryIndex { slots, lookup }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, end: EdgeEnd) -> Option<usize> {
        self.lookup.get(&end).copied()
    }

    pub fn end(&self, slot: usize) -> EdgeEnd {
        self.slots[slot]
    }

    pub fn slots(&self) -> &[EdgeEnd] {
        &self.slots
    }
}

/// A point on an edge. On external edges `x ∈ [0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub x: f64,
}

impl GraphPoint {
    pub fn new(edge: EdgeId, x: f64) -> Self {
        GraphPoint { edge, x }
    }
}

/// Position of an edge inside the sorted edge lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRef {
    Internal(usize),
    External(usize),
}

/// Combinatorial graph with edge lengths. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<VertexId>,
    internal: Vec<InternalEdge>,
    external: Vec<ExternalEdge>,
    boundary: BoundaryIndex,
    edges: BTreeMap<EdgeId, EdgeRef>,
}

impl MetricGraph {
    /// Validates and builds a graph. Edge ids are shared between internal
    /// and external edges and must be unique.
    pub fn new(
        vertices: Vec<VertexId>,
        mut internal: Vec<InternalEdge>,
        mut external: Vec<ExternalEdge>,
    ) -> Result<Self> {
        let vset: BTreeSet<VertexId> = vertices.iter().copied().collect();
        if vset.len() != vertices.len() {
            return Err(Error::InvalidGraph("duplicate vertex id".into()));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if internal.is_empty() && external.is_empty() {
            return Err(Error::InvalidGraph("no edges".into()));
        }
        internal.sort_by_key(|e| e.id);
        external.sort_by_key(|e| e.id);
        let mut edges = BTreeMap::new();
        for (i, e) in internal.iter().enumerate() {
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has nonpositive or infinite length {}",
                    e.id, e.length
                )));
            }
            for v in [e.from, e.to] {
                if !vset.contains(&v) {
                    return Err(Error::InvalidGraph(format!(
                        "edge {} references unknown vertex {v}",
                        e.id
                    )));
                }
            }
            if edges.insert(e.id, EdgeRef::Internal(i)).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
        }
        for (i, e) in external.iter().enumerate() {
            if !vset.contains(&e.at) {
                return Err(Error::InvalidGraph(format!(
                    "external edge {} references unknown vertex {}",
                    e.id, e.at
                )));
            }
            if edges.insert(e.id, EdgeRef::External(i)).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
        }

        let mut vertices = vertices;
        vertices.sort_unstable();
        let mut parent: BTreeMap<VertexId, VertexId> = vertices.iter().map(|&v| (v, v)).collect();
        fn root(p: &mut BTreeMap<VertexId, VertexId>, mut v: VertexId) -> VertexId {
            while p[&v] != v {
                let up = p[&p[&v]];
                p.insert(v, up);
                v = up;
            }
            v
        }
        for e in &internal {
            let (a, b) = (root(&mut parent, e.from), root(&mut parent, e.to));
            parent.insert(a, b);
        }
        let r0 = root(&mut parent, vertices[0]);
        for &v in &vertices {
            if root(&mut parent, v) != r0 {
                return Err(Error::InvalidGraph(format!(
                    "graph is disconnected (vertex {v} unreachable from {})",
                    vertices[0]
                )));
            }
        }

        let boundary = BoundaryIndex::new(&internal, &external);
        Ok(MetricGraph {
            vertices,
            internal,
            external,
            boundary,
            edges,
        })
    }

    /// Interval `[0, length]` with vertices 0 and 1 and edge id 0.
    pub fn interval(length: f64) -> Result<Self> {
        MetricGraph::new(
            vec![0, 1],
            vec![InternalEdge { id: 0, from: 0, to: 1, length }],
            vec![],
        )
    }

    /// Compact star: centre 0, edges `i` from the centre to vertex `i + 1`.
    pub fn compact_star(lengths: &[f64]) -> Result<Self> {
        MetricGraph::new(
            (0..=lengths.len()).collect(),
            lengths
                .iter()
                .enumerate()
                .map(|(i, &length)| InternalEdge { id: i, from: 0, to: i + 1, length })
                .collect(),
            vec![],
        )
    }

    /// Star of `n` half-lines attached to vertex 0.
    pub fn external_star(n: usize) -> Result<Self> {
        MetricGraph::new(vec![0], vec![], (0..n).map(|id| ExternalEdge { id, at: 0 }).collect())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn internal_edges(&self) -> &[InternalEdge] {
        &self.internal
    }

    pub fn external_edges(&self) -> &[ExternalEdge] {
        &self.external
    }

    pub fn boundary(&self) -> &BoundaryIndex {
        &self.boundary
    }

    pub fn edge_ref(&self, id: EdgeId) -> Result<EdgeRef> {
        self.edges.get(&id).copied().ok_or(Error::UnknownEdge(id))
    }

    pub fn internal_edge(&self, id: EdgeId) -> Result<&InternalEdge> {
        match self.edge_ref(id)? {
            EdgeRef::Internal(i) => Ok(&self.internal[i]),
            EdgeRef::External(_) => Err(Error::UnknownEdge(id)),
        }
    }

    pub fn e_int(&self) -> usize {
        self.internal.len()
    }

    pub fn e_ex(&self) -> usize {
        self.external.len()
    }

    /// Number of boundary slots `E = E_ex + 2 E_int`.
    pub fn e(&self) -> usize {
        self.e_ex() + 2 * self.e_int()
    }

    /// Total interior length `𝓛`.
    pub fn total_length(&self) -> f64 {
        self.internal.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.internal.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn is_compact(&self) -> bool {
        self.external.is_empty()
    }

    /// Slot indices of the start and finish ends of the `j`-th internal edge.
    pub fn internal_slots(&self, j: usize) -> (usize, usize) {
        let s = self.e_ex() + j;
        (s, s + self.e_int())
    }

    /// Vertex an edge end is attached to.
    pub fn vertex_of(&self, end: EdgeEnd) -> Result<VertexId> {
        match (self.edge_ref(end.edge)?, end.end) {
            (EdgeRef::External(i), End::External) => Ok(self.external[i].at),
            (EdgeRef::Internal(i), End::Start) => Ok(self.internal[i].from),
            (EdgeRef::Internal(i), End::Finish) => Ok(self.internal[i].to),
            _ => Err(Error::UnknownEdge(end.edge)),
        }
    }

    /// Edge ends at `v`, in slot order.
    pub fn incident_ends(&self, v: VertexId) -> Vec<EdgeEnd> {
        self.boundary
            .slots()
            .iter()
            .copied()
            .filter(|&s| self.vertex_of(s).ok() == Some(v))
            .collect()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident_ends(v).len()
    }

    /// Internal edges whose two ends share a vertex.
    pub fn tadpoles(&self) -> Vec<EdgeId> {
        self.internal
            .iter()
            .filter(|e| e.from == e.to)
            .map(|e| e.id)
            .collect()
    }

    pub fn has_tadpoles(&self) -> bool {
        self.internal.iter().any(|e| e.from == e.to)
    }

    /// Checks that a point lies on the graph.
    pub fn check_point(&self, p: GraphPoint) -> Result<()> {
        let limit = match self.edge_ref(p.edge)? {
            EdgeRef::Internal(i) => self.internal[i].length,
            EdgeRef::External(_) => f64::INFINITY,
        };
        if !(p.x >= 0.0 && p.x <= limit) {
            return Err(Error::OutOfRange { x: p.x, length: limit });
        }
        Ok(())
    }

    pub fn distance(&self, x: GraphPoint, y: GraphPoint) -> Result<f64> {
        distance::graph_distance(self, x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts() {
        let g = MetricGraph::interval(1.0).unwrap();
        assert_eq!((g.e_int(), g.e_ex(), g.e()), (1, 0, 2));
        assert_eq!(g.total_length(), 1.0);
    }

    #[test]
    fn star_counts() {
        let g = MetricGraph::external_star(3).unwrap();
        assert_eq!((g.e_int(), g.e_ex(), g.e()), (0, 3, 3));
    }

    #[test]
    fn lasso_is_built_but_flagged() {
        let g = MetricGraph::new(
            vec![0],
            vec![InternalEdge { id: 0, from: 0, to: 0, length: 2.0 }],
            vec![ExternalEdge { id: 1, at: 0 }],
        )
        .unwrap();
        assert_eq!(g.tadpoles(), vec![0]);
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn slot_layout() {
        let g = MetricGraph::new(
            vec![0, 1],
            vec![
                InternalEdge { id: 5, from: 0, to: 1, length: 1.0 },
                InternalEdge { id: 2, from: 1, to: 0, length: 2.0 },
            ],
            vec![ExternalEdge { id: 9, at: 1 }, ExternalEdge { id: 7, at: 0 }],
        )
        .unwrap();
        let order: Vec<EdgeEnd> = g.boundary().slots().to_vec();
        assert_eq!(
            order,
            vec![
                EdgeEnd::new(7, End::External),
                EdgeEnd::new(9, End::External),
                EdgeEnd::new(2, End::Start),
                EdgeEnd::new(5, End::Start),
                EdgeEnd::new(2, End::Finish),
                EdgeEnd::new(5, End::Finish),
            ]
        );
        assert_eq!(g.internal_slots(1), (3, 5));
        assert_eq!(g.boundary(), MetricGraph::new(
            g.vertices().to_vec(),
            g.internal_edges().to_vec(),
            g.external_edges().to_vec(),
        ).unwrap().boundary());
    }

    #[test]
    fn rejects_bad_input() {
        let bad_len = MetricGraph::new(vec![0, 1], vec![InternalEdge { id: 0, from: 0, to: 1, length: 0.0 }], vec![]);
        assert!(matches!(bad_len, Err(Error::InvalidGraph(_))));
        let dangling = MetricGraph::new(vec![0], vec![InternalEdge { id: 0, from: 0, to: 3, length: 1.0 }], vec![]);
        assert!(dangling.is_err());
        let split = MetricGraph::new(
            vec![0, 1, 2, 3],
            vec![
                InternalEdge { id: 0, from: 0, to: 1, length: 1.0 },
                InternalEdge { id: 1, from: 2, to: 3, length: 1.0 },
            ],
            vec![],
        );
        assert!(matches!(split, Err(Error::InvalidGraph(m)) if m.contains("disconnected")));
    }
}
