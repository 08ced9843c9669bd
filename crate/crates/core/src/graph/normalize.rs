use std::collections::BTreeMap;

use super::{ConditionKind, EdgeEnd, End, ExternalEdge, InternalEdge, MetricGraph, VertexId};
use crate::error::{Error, Result};
use crate::potential::Potentials;

/// Length of the potential-free buffer edge inserted after the support of an
/// external potential.
const EXTERNAL_MARGIN: f64 = 1.0;

/// Result of [`normalize_graph`].
#[derive(Clone, Debug)]
pub struct Normalized {
    pub graph: MetricGraph,
    pub potentials: Potentials,
    /// Degree-two vertices added by the splits; they carry Kirchhoff conditions.
    pub inserted: Vec<VertexId>,
    /// Where each edge end of the input graph ended up.
    pub end_map: BTreeMap<EdgeEnd, EdgeEnd>,
    /// Vertices that carried a tadpole.
    pub tadpole_vertices: Vec<VertexId>,
    original: MetricGraph,
}

impl Normalized {
    pub fn changed(&self) -> bool {
        !self.inserted.is_empty()
    }

    /// Carries per-vertex condition kinds over to the normalised graph,
    /// permuting custom blocks to the new slot order.
    pub fn remap_kinds(
        &self,
        kinds: &BTreeMap<VertexId, ConditionKind>,
    ) -> Result<BTreeMap<VertexId, ConditionKind>> {
        let mut out = BTreeMap::new();
        for (&v, kind) in kinds {
            let ConditionKind::Custom { p, l } = kind else {
                out.insert(v, kind.clone());
                continue;
            };
            if self.tadpole_vertices.contains(&v) {
                return Err(Error::InvalidConditions {
                    vertex: v,
                    reason: "custom conditions at a vertex carrying a loop edge are not supported; \
                             use a standard kind or split the loop explicitly"
                        .into(),
                });
            }
            let old: Vec<EdgeEnd> = self.original.incident_ends(v);
            let new: Vec<EdgeEnd> = self.graph.incident_ends(v);
            let d = old.len();
            if p.shape() != (d, d) || l.shape() != (d, d) {
                // Dimension errors are reported by the assembly step.
                out.insert(v, kind.clone());
                continue;
            }
            let perm: Vec<usize> = old
                .iter()
                .map(|e| {
                    let mapped = self.end_map[e];
                    new.iter().position(|n| *n == mapped).unwrap()
                })
                .collect();
            let mut p2 = p.clone();
            let mut l2 = l.clone();
            for a in 0..d {
                for b in 0..d {
                    p2[(perm[a], perm[b])] = p[(a, b)];
                    l2[(perm[a], perm[b])] = l[(a, b)];
                }
            }
            out.insert(v, ConditionKind::Custom { p: p2, l: l2 });
        }
        Ok(out)
    }
}

/// Splits tadpoles at their midpoint and moves external potentials onto new
/// internal edges, without changing the operator.
pub fn normalize_graph(g: &MetricGraph, potentials: &Potentials) -> Result<Normalized> {
    let mut next_vertex = g.vertices().iter().max().map_or(0, |v| v + 1);
    let mut next_edge = g
        .internal_edges()
        .iter()
        .map(|e| e.id)
        .chain(g.external_edges().iter().map(|e| e.id))
        .max()
        .map_or(0, |e| e + 1);

    let mut vertices = g.vertices().to_vec();
    let mut internal = Vec::new();
    let mut external = Vec::new();
    let mut pots = BTreeMap::new();
    let mut inserted = Vec::new();
    let mut tadpole_vertices = Vec::new();
    let mut end_map = BTreeMap::new();

    for e in g.internal_edges() {
        let poly = potentials.internal_poly(e.id);
        end_map.insert(EdgeEnd::new(e.id, End::Start), EdgeEnd::new(e.id, End::Start));
        if e.from != e.to {
            internal.push(*e);
            end_map.insert(EdgeEnd::new(e.id, End::Finish), EdgeEnd::new(e.id, End::Finish));
            if !poly.is_zero() {
                pots.insert(e.id, poly);
            }
            continue;
        }
        let mid = next_vertex;
        next_vertex += 1;
        let second = next_edge;
        next_edge += 1;
        let half = 0.5 * e.length;
        vertices.push(mid);
        inserted.push(mid);
        if !tadpole_vertices.contains(&e.from) {
            tadpole_vertices.push(e.from);
        }
        internal.push(InternalEdge { id: e.id, from: e.from, to: mid, length: half });
        internal.push(InternalEdge { id: second, from: mid, to: e.to, length: half });
        end_map.insert(EdgeEnd::new(e.id, End::Finish), EdgeEnd::new(second, End::Finish));
        if !poly.is_zero() {
            pots.insert(second, poly.shift(half));
            pots.insert(e.id, poly);
        }
    }

    for x in g.external_edges() {
        let ext = potentials.external.get(&x.id);
        let Some(ext) = ext.filter(|p| !p.poly.is_zero()) else {
            external.push(*x);
            end_map.insert(EdgeEnd::new(x.id, End::External), EdgeEnd::new(x.id, End::External));
            continue;
        };
        let support = match ext.support {
            Some(s) if s > 0.0 && s.is_finite() => s,
            _ => {
                return Err(Error::InvalidGraph(format!(
                    "external edge {} carries a potential without a declared finite support",
                    x.id
                )))
            }
        };
        let (w1, w2) = (next_vertex, next_vertex + 1);
        next_vertex += 2;
        let (carrier, buffer) = (next_edge, next_edge + 1);
        next_edge += 2;
        vertices.extend([w1, w2]);
        inserted.extend([w1, w2]);
        internal.push(InternalEdge { id: carrier, from: x.at, to: w1, length: support });
        internal.push(InternalEdge { id: buffer, from: w1, to: w2, length: EXTERNAL_MARGIN });
        external.push(ExternalEdge { id: x.id, at: w2 });
        pots.insert(carrier, ext.poly.clone());
        end_map.insert(EdgeEnd::new(x.id, End::External), EdgeEnd::new(carrier, End::Start));
    }

    let graph = MetricGraph::new(vertices, internal, external)?;
    Ok(Normalized {
        graph,
        potentials: Potentials { internal: pots, external: BTreeMap::new() },
        inserted,
        end_map,
        tadpole_vertices,
        original: g.clone(),
    })
}
