//! Test graphs and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use qgs::graph::{ExternalEdge, InternalEdge};
use qgs::{ConditionKind, MetricGraph, Polynomial, Potentials, QuantumGraph};

/// `x(1 − x)`.
pub fn bump() -> Polynomial {
    Polynomial::new(vec![0.0, 1.0, -1.0])
}

pub fn interval(kind: ConditionKind, v: &Polynomial) -> QuantumGraph {
    QuantumGraph::uniform(MetricGraph::interval(1.0).unwrap(), kind, v).unwrap()
}

pub const STAR_LENGTHS: [f64; 3] = [1.0, 0.75, 1.25];

/// Compact 3-star with Kirchhoff conditions everywhere.
pub fn kirchhoff_star(v: &Polynomial) -> QuantumGraph {
    QuantumGraph::uniform(MetricGraph::compact_star(&STAR_LENGTHS).unwrap(), ConditionKind::Kirchhoff, v).unwrap()
}

/// Three half-lines at one Kirchhoff vertex.
pub fn external_star() -> QuantumGraph {
    QuantumGraph::uniform(MetricGraph::external_star(3).unwrap(), ConditionKind::Kirchhoff, &Polynomial::zero()).unwrap()
}

/// A loop of length 1.2 at vertex 0 and a pendant edge of length 0.8 to
/// vertex 1, normalised. `alpha` is the δ strength at the junction; both
/// edges carry `v`.
pub fn lasso(v: &Polynomial, alpha: f64) -> QuantumGraph {
    let g = MetricGraph::new(
        vec![0, 1],
        vec![
            InternalEdge { id: 0, from: 0, to: 0, length: 1.2 },
            InternalEdge { id: 1, from: 0, to: 1, length: 0.8 },
        ],
        vec![],
    )
    .unwrap();
    let kind = if alpha == 0.0 { ConditionKind::Kirchhoff } else { ConditionKind::Delta(alpha) };
    let kinds: BTreeMap<_, _> = [(0, kind), (1, ConditionKind::Kirchhoff)].into_iter().collect();
    let pots = Potentials::zero().with(0, v.clone()).with(1, v.clone());
    QuantumGraph::normalized(&g, &kinds, &pots).unwrap().0
}

/// Compact star with a δ-vertex and a potential.
pub fn delta_star(v: &Polynomial, alpha: f64) -> QuantumGraph {
    let g = MetricGraph::compact_star(&STAR_LENGTHS).unwrap();
    let kinds: BTreeMap<_, _> = [(0, ConditionKind::Delta(alpha))].into_iter().collect();
    let pots = Potentials::uniform(0..3, v);
    QuantumGraph::new(g, &kinds, pots).unwrap()
}

/// Half-line with a Robin end: `ψ′(0) = −c ψ(0)`, one bound state `−c²`.
pub fn robin_half_line(c: f64) -> QuantumGraph {
    use qgs::linalg::{c as cx, CMat};
    let g = MetricGraph::new(vec![0], vec![], vec![ExternalEdge { id: 0, at: 0 }]).unwrap();
    let kind = ConditionKind::Custom { p: CMat::zeros(1, 1), l: CMat::from_element(1, 1, cx(c, 0.0)) };
    let kinds: BTreeMap<_, _> = [(0, kind)].into_iter().collect();
    QuantumGraph::new(g, &kinds, Potentials::zero()).unwrap()
}

/// `Σ_{n ≥ start} e^{−n²π²t}`.
pub fn theta(t: f64, start: u32) -> f64 {
    (start..10_000).map(|n| (-(n as f64 * PI).powi(2) * t).exp()).sum()
}

/// Lumped-mass finite differences for a compact star whose centre carries
/// Kirchhoff conditions and whose leaves are Neumann, on a grid of step
/// `1/n` (edge lengths must be multiples of it).
pub struct StarDifferences {
    /// Per edge: diagonal stiffness entries from the node next to the centre
    /// outward to the leaf, and the (uniform) off-diagonal coupling.
    edges: Vec<(Vec<f64>, Vec<f64>, f64)>,
    centre_k: f64,
    centre_m: f64,
}

impl StarDifferences {
    pub fn new(lengths: &[f64], v: &Polynomial, n: usize) -> Self {
        let h = 1.0 / n as f64;
        let mut centre_k = 0.0;
        let mut centre_m = 0.0;
        let edges = lengths
            .iter()
            .map(|&l| {
                let m = (l * n as f64).round() as usize;
                assert!((m as f64 * h - l).abs() < 1e-12, "length {l} is not a multiple of 1/{n}");
                centre_k += 1.0 / h + 0.5 * h * v.eval(0.0);
                centre_m += 0.5 * h;
                let mut diag = Vec::with_capacity(m);
                let mut mass = Vec::with_capacity(m);
                for i in 1..=m {
                    let x = i as f64 * h;
                    if i < m {
                        diag.push(2.0 / h + h * v.eval(x));
                        mass.push(h);
                    } else {
                        diag.push(1.0 / h + 0.5 * h * v.eval(x));
                        mass.push(0.5 * h);
                    }
                }
                (diag, mass, -1.0 / h)
            })
            .collect();
        StarDifferences { edges, centre_k, centre_m }
    }

    /// Number of discrete eigenvalues below `sigma`: the inertia of
    /// `K − σM`, eliminating every edge from its leaf towards the centre.
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = 1e-300;
        let mut negatives = 0;
        let mut centre = self.centre_k - sigma * self.centre_m;
        for (diag, mass, off) in &self.edges {
            let mut pivot = 0.0;
            for i in (0..diag.len()).rev() {
                let d = diag[i] - sigma * mass[i];
                pivot = if i + 1 == diag.len() { d } else { d - off * off / pivot };
                if pivot == 0.0 {
                    pivot = tiny;
                }
                if pivot < 0.0 {
                    negatives += 1;
                }
            }
            centre -= off * off / pivot;
        }
        negatives + usize::from(centre < 0.0)
    }

    /// The `j`-th eigenvalue (0-based) by bisection on the count.
    pub fn eigenvalue(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        while self.count_below(hi) <= j {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Eigenvalues `≤ lambda_max` (with a margin) extrapolated over five grid
/// levels `n·2^i`, eliminating `h², h³, h⁴, h⁵`.
pub fn star_oracle(lengths: &[f64], v: &Polynomial, lambda_max: f64, base: usize) -> Vec<f64> {
    let levels: Vec<StarDifferences> = (0..5).map(|i| StarDifferences::new(lengths, v, base << i)).collect();
    let lower = v.range_on(0.0, lengths.iter().cloned().fold(0.0, f64::max)).0.min(0.0) - 1.0;
    let count = levels[4].count_below(lambda_max + 1.0);
    let hs: Vec<f64> = (0..5).map(|i| 1.0 / (base << i) as f64).collect();
    (0..count)
        .map(|j| {
            let values: Vec<f64> = levels.iter().map(|l| l.eigenvalue(j, lower, lambda_max + 10.0)).collect();
            richardson(&hs, &values)
        })
        .collect()
}

/// Value at `h = 0` of `λ(h) = λ + c₂h² + c₃h³ + c₄h⁴ + c₅h⁵` through the
/// five given points.
pub fn richardson(hs: &[f64], values: &[f64]) -> f64 {
    let n = hs.len();
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| if j == 0 { 1.0 } else { hs[i].powi(j as i32 + 1) });
    let b = nalgebra::DVector::from_column_slice(values);
    a.lu().solve(&b).expect("Richardson system is regular")[0]
}
