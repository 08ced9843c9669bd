//! Resolvent kernel of `H`, its action on functions, and the regularised
//! resolvent trace.
//!
//! The kernel is `r(x, y) = δ_{ee′} r₀(x, y) + Σ A_a(x) M_ab B_b(y)` with
//! `M = (1 − 𝔖T)^{-1} 𝔖`. `B_b(y)` is the amplitude that a unit source at
//! `y` sends towards the edge end `b`, `M` turns incoming into outgoing
//! amplitudes, and `A_a(x)` is the outgoing wave from end `a`, normalised to
//! 1 there. Every factor is written with `e^{ik·(non-negative)}`, so nothing
//! overflows for large `Im k`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fundamental::{FundamentalPair, Normalisation, ScaledSample};
use crate::graph::{EdgeId, EdgeRef, GraphPoint};
use crate::linalg::{c, CMat, C64, I};
use crate::ode::Tolerances;
use crate::quadrature::{composite_nodes, weighted_sum};
use crate::quantum::QuantumGraph;
use crate::secular::SecularMatrices;

/// Which comparison operator is subtracted on external edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regularization {
    /// Half-line Laplacian with `ψ(0) = 0`.
    Dirichlet,
    /// Half-line Laplacian with `ψ′(0) = 0`.
    Neumann,
}

impl Regularization {
    pub fn label(self) -> &'static str {
        match self {
            Regularization::Dirichlet => "D",
            Regularization::Neumann => "N",
        }
    }

    /// `+1` for Neumann, `−1` for Dirichlet: the sign of the reflected wave.
    pub fn reflection(self) -> f64 {
        match self {
            Regularization::Dirichlet => -1.0,
            Regularization::Neumann => 1.0,
        }
    }
}

/// Half-line kernel `(i/2k)(e^{ik|x−y|} ∓ e^{ik(x+y)})` on an external edge,
/// `−` for Dirichlet and `+` for Neumann; zero on internal edges.
pub fn star_kernel(reg: Regularization, k: C64, external: bool, x: f64, y: f64) -> C64 {
    if !external {
        return c(0.0, 0.0);
    }
    I / (2.0 * k) * ((I * k * (x - y).abs()).exp() + reg.reflection() * (I * k * (x + y)).exp())
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    /// Relative change between panel doublings at which quadrature stops.
    pub tol: f64,
    pub max_doublings: usize,
    pub ode: Tolerances,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { tol: 1e-12, max_doublings: 14, ode: Tolerances::tight() }
    }
}

/// Everything needed to evaluate the kernel at one `k`.
#[derive(Clone, Debug)]
pub struct KernelEvaluation {
    pub k: C64,
    pub mats: SecularMatrices,
    /// `M = (1 − 𝔖T)^{-1} 𝔖`.
    pub middle: CMat,
    /// `−W` per internal edge, the denominator of the free kernel.
    w_cal: Vec<C64>,
    e_ex: usize,
    e_int: usize,
}

impl KernelEvaluation {
    pub fn new(qg: &QuantumGraph, k: C64, tol: Tolerances) -> Result<Self> {
        if k.im < 0.0 {
            return Err(Error::Unsupported("the resolvent is evaluated for Im k ≥ 0 only".into()));
        }
        let mode = if k.im > 0.0 { Normalisation::default() } else { Normalisation::PlaneWave };
        let mats = SecularMatrices::assemble(qg, k, mode, tol)?;
        let middle = mats.middle()?;
        let w_cal = mats.pairs.iter().map(|p| -p.wronskian()).collect();
        Ok(KernelEvaluation { k, mats, middle, w_cal, e_ex: qg.graph.e_ex(), e_int: qg.graph.e_int() })
    }

    fn pair(&self, j: usize) -> &FundamentalPair {
        &self.mats.pairs[j]
    }

    fn slots(&self, j: usize) -> (usize, usize) {
        (self.e_ex + j, self.e_ex + self.e_int + j)
    }

    /// Outgoing waves `A_a(x)` of the two ends of internal edge `j`.
    fn outgoing(&self, j: usize, s: &ScaledSample) -> (C64, C64) {
        let p = self.pair(j);
        let ik = I * self.k;
        let (_, ml) = p.minus_ends();
        ((ik * s.x).exp() * s.wp, (ik * (p.length - s.x)).exp() * s.wm / ml[0])
    }

    /// Amplitudes `B_b(y)` a unit source at `y` sends to the two ends.
    fn incoming(&self, j: usize, s: &ScaledSample) -> (C64, C64) {
        let p = self.pair(j);
        let ik = I * self.k;
        let (_, pl) = p.plus_ends();
        let w = self.w_cal[j];
        ((ik * s.x).exp() * s.wp / w, (ik * (p.length - s.x)).exp() * pl[0] * s.wm / w)
    }

    /// Free kernel on internal edge `j` from samples at `x` and `y`.
    fn free_internal(&self, j: usize, sx: &ScaledSample, sy: &ScaledSample) -> C64 {
        let (hi, lo) = if sx.x >= sy.x { (sx, sy) } else { (sy, sx) };
        (I * self.k * (hi.x - lo.x)).exp() * hi.wp * lo.wm / self.w_cal[j]
    }

    fn free_external(&self, x: f64, y: f64) -> C64 {
        I / (2.0 * self.k) * (I * self.k * (x - y).abs()).exp()
    }

    /// `(slots, A values)` at a point.
    fn out_at(&self, qg: &QuantumGraph, p: GraphPoint) -> Result<(Vec<usize>, Vec<C64>, Option<ScaledSample>)> {
        match qg.graph.edge_ref(p.edge)? {
            EdgeRef::External(s) => Ok((vec![s], vec![(I * self.k * p.x).exp()], None)),
            EdgeRef::Internal(j) => {
                let smp = self.pair(j).samples(&[p.x])?[0];
                let (a0, al) = self.outgoing(j, &smp);
                let (s0, sl) = self.slots(j);
                Ok((vec![s0, sl], vec![a0, al], Some(smp)))
            }
        }
    }

    fn in_at(&self, qg: &QuantumGraph, p: GraphPoint) -> Result<(Vec<usize>, Vec<C64>, Option<ScaledSample>)> {
        match qg.graph.edge_ref(p.edge)? {
            EdgeRef::External(s) => Ok((vec![s], vec![(I * self.k * p.x).exp() / (-2.0 * I * self.k)], None)),
            EdgeRef::Internal(j) => {
                let smp = self.pair(j).samples(&[p.x])?[0];
                let (b0, bl) = self.incoming(j, &smp);
                let (s0, sl) = self.slots(j);
                Ok((vec![s0, sl], vec![b0, bl], Some(smp)))
            }
        }
    }

    /// `r(x, y)`.
    pub fn kernel(&self, qg: &QuantumGraph, x: GraphPoint, y: GraphPoint) -> Result<C64> {
        qg.graph.check_point(x)?;
        qg.graph.check_point(y)?;
        let (sa, va, smx) = self.out_at(qg, x)?;
        let (sb, vb, smy) = self.in_at(qg, y)?;
        let mut r = c(0.0, 0.0);
        for (a, fa) in sa.iter().zip(&va) {
            for (b, fb) in sb.iter().zip(&vb) {
                r += fa * self.middle[(*a, *b)] * fb;
            }
        }
        if x.edge == y.edge {
            r += match (smx, smy) {
                (Some(sx), Some(sy)) => {
                    let EdgeRef::Internal(j) = qg.graph.edge_ref(x.edge)? else { unreachable!() };
                    self.free_internal(j, &sx, &sy)
                }
                _ => self.free_external(x.x, y.x),
            };
        }
        Ok(r)
    }

    /// Diagonal `r(x, x)` on internal edge `j` at ascending points.
    fn diagonal(&self, j: usize, xs: &[f64]) -> Result<Vec<C64>> {
        let (s0, sl) = self.slots(j);
        let m = &self.middle;
        let w = self.w_cal[j];
        Ok(self
            .pair(j)
            .samples(xs)?
            .iter()
            .map(|s| {
                let (a0, al) = self.outgoing(j, s);
                let (b0, bl) = self.incoming(j, s);
                s.wp * s.wm / w
                    + a0 * (m[(s0, s0)] * b0 + m[(s0, sl)] * bl)
                    + al * (m[(sl, s0)] * b0 + m[(sl, sl)] * bl)
            })
            .collect())
    }

    /// `∫ [r_H − r_{D/N}](x, x) dx` over external edge `s`, in closed form.
    fn external_trace(&self, s: usize, reg: Regularization) -> C64 {
        -(self.middle[(s, s)] - reg.reflection()) / (4.0 * self.k * self.k)
    }
}

/// Free kernel `δ_{ee′} r₀(x, y)`.
pub fn free_kernel(qg: &QuantumGraph, k: C64, x: GraphPoint, y: GraphPoint) -> Result<C64> {
    qg.graph.check_point(x)?;
    qg.graph.check_point(y)?;
    if x.edge != y.edge {
        return Ok(c(0.0, 0.0));
    }
    match qg.graph.edge_ref(x.edge)? {
        EdgeRef::External(_) => Ok(I / (2.0 * k) * (I * k * (x.x - y.x).abs()).exp()),
        EdgeRef::Internal(j) => {
            let mode = if k.im > 0.0 { Normalisation::default() } else { Normalisation::PlaneWave };
            let p = FundamentalPair::solve(x.edge, qg.edge_potential(j), k, mode, Tolerances::default())?;
            let (lo, hi) = if x.x <= y.x { (x.x, y.x) } else { (y.x, x.x) };
            let s = p.samples(&[lo, hi])?;
            Ok((I * k * (hi - lo)).exp() * s[1].wp * s[0].wm / (-p.wronskian()))
        }
    }
}

/// `r_H(k²; x, y)`.
pub fn resolvent_kernel(qg: &QuantumGraph, k: C64, x: GraphPoint, y: GraphPoint) -> Result<C64> {
    KernelEvaluation::new(qg, k, Tolerances::default())?.kernel(qg, x, y)
}

/// Integrates a batch integrand over `[a, b]` with composite GL20, doubling
/// the panel count until two successive values agree.
#[allow(clippy::too_many_arguments)]
fn adaptive<F>(f: F, edge: EdgeId, a: f64, b: f64, start: usize, tol: f64, atol: f64, max_doublings: usize) -> Result<C64>
where
    F: Fn(&[f64]) -> Result<Vec<C64>>,
{
    if b <= a {
        return Ok(c(0.0, 0.0));
    }
    let eval = |panels: usize| -> Result<C64> {
        let (x, w) = composite_nodes(a, b, panels);
        Ok(weighted_sum(&f(&x)?, &w))
    };
    let mut panels = start.max(1);
    let mut prev = eval(panels)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        panels *= 2;
        let next = eval(panels)?;
        change = (next - prev).norm();
        if change <= tol * next.norm() + atol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature { edge, change })
}

fn start_panels(length: f64, k: C64) -> usize {
    ((length * k.norm()) / 2.0).ceil().max(1.0) as usize
}

/// `tr(R_H(k²) − J_ex R_{D/N}(k²) J_ex*)` for `Im k > 0`.
pub fn regularized_trace(qg: &QuantumGraph, reg: Regularization, k: C64, opts: &TraceOptions) -> Result<C64> {
    let ev = KernelEvaluation::new(qg, k, opts.ode)?;
    regularized_trace_with(&ev, qg, reg, opts)
}

/// [`regularized_trace`] with a prepared kernel.
pub fn regularized_trace_with(
    ev: &KernelEvaluation,
    qg: &QuantumGraph,
    reg: Regularization,
    opts: &TraceOptions,
) -> Result<C64> {
    let k = ev.k;
    let internal: Vec<C64> = qg
        .graph
        .internal_edges()
        .par_iter()
        .enumerate()
        .map(|(j, e)| {
            let scale = e.length / (2.0 * k.norm());
            adaptive(
                |xs| ev.diagonal(j, xs),
                e.id,
                0.0,
                e.length,
                start_panels(e.length, k),
                opts.tol,
                opts.tol * 1e-3 * scale,
                opts.max_doublings,
            )
        })
        .collect::<Result<_>>()?;
    let external: C64 = (0..qg.graph.e_ex()).map(|s| ev.external_trace(s, reg)).sum();
    Ok(internal.iter().sum::<C64>() + external)
}

/// A function on the graph, given edgewise. External components are taken to
/// vanish beyond `external_cutoff`.
#[derive(Clone)]
pub struct GraphFunction {
    pub parts: BTreeMap<EdgeId, Arc<dyn Fn(f64) -> C64 + Send + Sync>>,
    pub external_cutoff: f64,
}

impl GraphFunction {
    pub fn new(external_cutoff: f64) -> Self {
        GraphFunction { parts: BTreeMap::new(), external_cutoff }
    }

    pub fn with(mut self, edge: EdgeId, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        self.parts.insert(edge, Arc::new(f));
        self
    }

    pub fn eval(&self, p: GraphPoint) -> C64 {
        self.parts.get(&p.edge).map_or(c(0.0, 0.0), |f| f(p.x))
    }

    fn batch(&self, edge: EdgeId, xs: &[f64]) -> Vec<C64> {
        match self.parts.get(&edge) {
            Some(f) => xs.iter().map(|&x| f(x)).collect(),
            None => vec![c(0.0, 0.0); xs.len()],
        }
    }
}

/// `(R_H(k²) ψ)(x)` at the given points by panel quadrature of the kernel.
pub fn apply_resolvent(
    qg: &QuantumGraph,
    k: C64,
    psi: &GraphFunction,
    points: &[GraphPoint],
    opts: &TraceOptions,
) -> Result<Vec<C64>> {
    let ev = KernelEvaluation::new(qg, k, opts.ode)?;
    let g = &qg.graph;
    let cut = psi.external_cutoff;
    let quad = |edge: EdgeId, f: &dyn Fn(&[f64]) -> Result<Vec<C64>>, a: f64, b: f64, start: usize| {
        adaptive(f, edge, a, b, start, opts.tol, opts.tol * 1e-6, opts.max_doublings)
    };

    // c_b = ∫ B_b(y) ψ(y) dy for every slot.
    let mut amps = vec![c(0.0, 0.0); g.e()];
    for (s, e) in g.external_edges().iter().enumerate() {
        let f = |ys: &[f64]| -> Result<Vec<C64>> {
            let v = psi.batch(e.id, ys);
            Ok(ys.iter().zip(v).map(|(y, p)| (I * k * *y).exp() / (-2.0 * I * k) * p).collect())
        };
        amps[s] = quad(e.id, &f, 0.0, cut, start_panels(cut, k).max(8))?;
    }
    for (j, e) in g.internal_edges().iter().enumerate() {
        let (s0, sl) = ev.slots(j);
        for (slot, which) in [(s0, 0), (sl, 1)] {
            let f = |ys: &[f64]| -> Result<Vec<C64>> {
                let v = psi.batch(e.id, ys);
                let smp = ev.pair(j).samples(ys)?;
                Ok(smp
                    .iter()
                    .zip(v)
                    .map(|(s, p)| {
                        let (b0, bl) = ev.incoming(j, s);
                        p * if which == 0 { b0 } else { bl }
                    })
                    .collect())
            };
            amps[slot] = quad(e.id, &f, 0.0, e.length, start_panels(e.length, k).max(4))?;
        }
    }
    let out_amps = &ev.middle * nalgebra::DVector::from_vec(amps);

    points
        .par_iter()
        .map(|&p| {
            g.check_point(p)?;
            let (sa, va, smx) = ev.out_at(qg, p)?;
            let mut phi: C64 = sa.iter().zip(&va).map(|(a, f)| f * out_amps[*a]).sum();
            match (g.edge_ref(p.edge)?, smx) {
                (EdgeRef::External(_), _) => {
                    let f = |ys: &[f64]| -> Result<Vec<C64>> {
                        let v = psi.batch(p.edge, ys);
                        Ok(ys.iter().zip(v).map(|(y, q)| ev.free_external(p.x, *y) * q).collect())
                    };
                    let x = p.x.min(cut);
                    phi += quad(p.edge, &f, 0.0, x, start_panels(x, k).max(4))?;
                    phi += quad(p.edge, &f, x, cut, start_panels(cut - x, k).max(4))?;
                }
                (EdgeRef::Internal(j), Some(sx)) => {
                    let l = ev.pair(j).length;
                    let f = |ys: &[f64]| -> Result<Vec<C64>> {
                        let v = psi.batch(p.edge, ys);
                        let smp = ev.pair(j).samples(ys)?;
                        Ok(smp.iter().zip(v).map(|(s, q)| ev.free_internal(j, &sx, s) * q).collect())
                    };
                    phi += quad(p.edge, &f, 0.0, p.x, start_panels(p.x, k).max(4))?;
                    phi += quad(p.edge, &f, p.x, l, start_panels(l - p.x, k).max(4))?;
                }
                _ => unreachable!("internal points always carry a sample"),
            }
            Ok(phi)
        })
        .collect()
}
