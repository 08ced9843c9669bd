use std::collections::BTreeMap;

use super::{EdgeEnd, MetricGraph, VertexId};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, identity, max_abs, real, CMat};

/// Tolerance applied to user-supplied projector and self-adjointness checks.
pub const CUSTOM_TOLERANCE: f64 = 1e-10;

/// Vertex condition written as `(P + L)ψ̲ + P⊥ψ̲′ = 0` with inward derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionKind {
    /// Continuity and vanishing derivative sum.
    Kirchhoff,
    Dirichlet,
    Neumann,
    /// Continuity and `Σ ψ′ = α ψ(v)`.
    Delta(f64),
    /// Explicit blocks indexed by the vertex's edge ends in slot order.
    Custom { p: CMat, l: CMat },
}

impl ConditionKind {
    /// `(P_v, L_v)` for a vertex of degree `d`.
    pub fn blocks(&self, d: usize) -> (CMat, CMat) {
        let j = CMat::from_element(d, d, real(1.0));
        match self {
            ConditionKind::Kirchhoff => (identity(d) - j / real(d as f64), CMat::zeros(d, d)),
            ConditionKind::Dirichlet => (identity(d), CMat::zeros(d, d)),
            ConditionKind::Neumann => (CMat::zeros(d, d), CMat::zeros(d, d)),
            ConditionKind::Delta(alpha) => {
                let df = d as f64;
                (identity(d) - &j / real(df), j * real(-alpha / (df * df)))
            }
            ConditionKind::Custom { p, l } => (p.clone(), l.clone()),
        }
    }

    /// Whether the condition is unchanged by permuting the vertex's ends.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, ConditionKind::Custom { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexBlock {
    pub vertex: VertexId,
    pub kind: ConditionKind,
    /// Edge ends the block rows refer to, in slot order.
    pub ends: Vec<EdgeEnd>,
    pub p: CMat,
    pub l: CMat,
}

/// Assembled `E × E` matrices `P` and `L` plus their per-vertex blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexConditions {
    pub p: CMat,
    pub l: CMat,
    pub blocks: Vec<VertexBlock>,
}

/// Deviations of `(P, L)` from the required algebraic structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionDefects {
    pub idempotent: f64,
    pub hermitian_p: f64,
    pub hermitian_l: f64,
    pub l_in_range: f64,
}

impl ConditionDefects {
    pub fn of(p: &CMat, l: &CMat) -> Self {
        let pp = identity(p.nrows()) - p;
        ConditionDefects {
            idempotent: max_abs(&(p * p - p)),
            hermitian_p: hermitian_defect(p),
            hermitian_l: hermitian_defect(l),
            l_in_range: max_abs(&(&pp * l * &pp - l)),
        }
    }

    pub fn max(&self) -> f64 {
        self.idempotent
            .max(self.hermitian_p)
            .max(self.hermitian_l)
            .max(self.l_in_range)
    }

    fn describe(&self, tol: f64) -> Option<String> {
        if self.idempotent > tol || self.hermitian_p > tol {
            Some(format!(
                "P is not an orthogonal projector (‖P²−P‖ = {:.3e}, ‖P−P*‖ = {:.3e})",
                self.idempotent, self.hermitian_p
            ))
        } else if self.hermitian_l > tol {
            Some(format!("L is not self-adjoint (‖L−L*‖ = {:.3e})", self.hermitian_l))
        } else if self.l_in_range > tol {
            Some(format!("P⊥LP⊥ ≠ L (defect {:.3e})", self.l_in_range))
        } else {
            None
        }
    }
}

impl VertexConditions {
    /// Assembles local conditions; vertices absent from `kinds` get Kirchhoff.
    pub fn standard(g: &MetricGraph, kinds: &BTreeMap<VertexId, ConditionKind>) -> Result<Self> {
        for v in kinds.keys() {
            if !g.vertices().contains(v) {
                return Err(Error::InvalidGraph(format!("conditions given for unknown vertex {v}")));
            }
        }
        let n = g.e();
        let mut p = CMat::zeros(n, n);
        let mut l = CMat::zeros(n, n);
        let mut blocks = Vec::new();
        for &v in g.vertices() {
            let ends = g.incident_ends(v);
            if ends.is_empty() {
                continue;
            }
            let kind = kinds.get(&v).cloned().unwrap_or(ConditionKind::Kirchhoff);
            let (pv, lv) = kind.blocks(ends.len());
            if pv.shape() != (ends.len(), ends.len()) || lv.shape() != pv.shape() {
                return Err(Error::InvalidConditions {
                    vertex: v,
                    reason: format!(
                        "blocks must be {d}×{d} (vertex degree {d}), got P {:?}, L {:?}",
                        pv.shape(),
                        lv.shape(),
                        d = ends.len()
                    ),
                });
            }
            if let Some(reason) = ConditionDefects::of(&pv, &lv).describe(CUSTOM_TOLERANCE) {
                return Err(Error::InvalidConditions { vertex: v, reason });
            }
            let slots: Vec<usize> = ends.iter().map(|&e| g.boundary().slot(e).unwrap()).collect();
            for (a, &sa) in slots.iter().enumerate() {
                for (b, &sb) in slots.iter().enumerate() {
                    p[(sa, sb)] = pv[(a, b)];
                    l[(sa, sb)] = lv[(a, b)];
                }
            }
            blocks.push(VertexBlock { vertex: v, kind, ends, p: pv, l: lv });
        }
        Ok(VertexConditions { p, l, blocks })
    }

    /// The same kind at every vertex.
    pub fn uniform(g: &MetricGraph, kind: ConditionKind) -> Result<Self> {
        let kinds = g.vertices().iter().map(|&v| (v, kind.clone())).collect();
        VertexConditions::standard(g, &kinds)
    }

    pub fn p_perp(&self) -> CMat {
        identity(self.p.nrows()) - &self.p
    }

    pub fn defects(&self) -> ConditionDefects {
        ConditionDefects::of(&self.p, &self.l)
    }

    pub fn block(&self, v: VertexId) -> Option<&VertexBlock> {
        self.blocks.iter().find(|b| b.vertex == v)
    }
}
