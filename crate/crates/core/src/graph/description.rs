//! JSON graph description files.
//!
//! ```json
//! {
//!   "vertices": [0, 1],
//!   "internal_edges": [{"id": 0, "from": 0, "to": 1, "length": 1.0, "potential": [0, 1, -1]}],
//!   "external_edges": [{"id": 1, "at": 0}],
//!   "conditions": {"0": "kirchhoff", "1": "dirichlet"}
//! }
//! ```
//!
//! A vertex condition is one of `"kirchhoff"`, `"dirichlet"`, `"neumann"`,
//! `{"delta": alpha}` or `{"P": matrix, "L": matrix}` with row-major
//! matrices of `[re, im]` pairs, indexed by the vertex's edge ends in slot
//! order. Vertices without an entry get Kirchhoff conditions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ConditionKind, EdgeId, ExternalEdge, InternalEdge, MetricGraph, VertexId};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::potential::{ExternalPotential, Polynomial, Potentials};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InternalEdgeDescription {
    pub id: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    #[serde(default)]
    pub potential: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalEdgeDescription {
    pub id: EdgeId,
    pub at: VertexId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<f64>,
    /// The potential vanishes for `x > support`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomMatrices {
    #[serde(rename = "P")]
    pub p: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KindDescription {
    Named(String),
    Delta { delta: f64 },
    Custom(CustomMatrices),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDescription {
    pub vertices: Vec<VertexId>,
    #[serde(default)]
    pub internal_edges: Vec<InternalEdgeDescription>,
    #[serde(default)]
    pub external_edges: Vec<ExternalEdgeDescription>,
    #[serde(default)]
    pub conditions: BTreeMap<String, KindDescription>,
}

fn matrix(rows: &[Vec<[f64; 2]>], vertex: VertexId, name: &str) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidConditions {
            vertex,
            reason: format!("matrix {name} is not square"),
        });
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

impl KindDescription {
    pub fn to_kind(&self, vertex: VertexId) -> Result<ConditionKind> {
        match self {
            KindDescription::Named(name) => match name.to_ascii_lowercase().as_str() {
                "kirchhoff" | "standard" => Ok(ConditionKind::Kirchhoff),
                "dirichlet" => Ok(ConditionKind::Dirichlet),
                "neumann" => Ok(ConditionKind::Neumann),
                other => Err(Error::InvalidConditions {
                    vertex,
                    reason: format!("unknown condition kind {other:?}"),
                }),
            },
            KindDescription::Delta { delta } => Ok(ConditionKind::Delta(*delta)),
            KindDescription::Custom(m) => Ok(ConditionKind::Custom {
                p: matrix(&m.p, vertex, "P")?,
                l: matrix(&m.l, vertex, "L")?,
            }),
        }
    }
}

impl GraphDescription {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("description serialises")
    }

    /// Validated graph, potentials and per-vertex condition kinds.
    pub fn build(&self) -> Result<(MetricGraph, Potentials, BTreeMap<VertexId, ConditionKind>)> {
        let graph = MetricGraph::new(
            self.vertices.clone(),
            self.internal_edges
                .iter()
                .map(|e| InternalEdge { id: e.id, from: e.from, to: e.to, length: e.length })
                .collect(),
            self.external_edges.iter().map(|e| ExternalEdge { id: e.id, at: e.at }).collect(),
        )?;
        let mut potentials = Potentials::zero();
        for e in &self.internal_edges {
            if e.potential.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {} has a non-finite potential coefficient", e.id)));
            }
            let p = Polynomial::new(e.potential.clone());
            if !p.is_zero() {
                potentials.internal.insert(e.id, p);
            }
        }
        for e in &self.external_edges {
            let p = Polynomial::new(e.potential.clone());
            if !p.is_zero() {
                potentials
                    .external
                    .insert(e.id, ExternalPotential { poly: p, support: e.support });
            }
        }
        let mut kinds = BTreeMap::new();
        for (key, kind) in &self.conditions {
            let v: VertexId = key.trim().parse().map_err(|_| {
                Error::Parse(format!("conditions: vertex key {key:?} is not an integer id"))
            })?;
            kinds.insert(v, kind.to_kind(v)?);
        }
        Ok((graph, potentials, kinds))
    }
}
