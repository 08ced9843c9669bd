//! Large-`k` expansion of the 𝔖-matrix, `𝔖(k) ~ 𝔖_∞ + Σ k^{−m} 𝔖_m`.

use super::beta::{compositions, BetaTable};
use crate::linalg::{c, conj, identity, pow, CMat, C64, I};
use crate::quantum::QuantumGraph;

/// Highest supported order of the 𝔖-matrix expansion.
pub const MAX_SMATRIX_ORDER: usize = 6;

/// `𝛃_j`, `Λ_m` and `Ω_j` of a graph.
#[derive(Clone, Debug)]
pub struct OmegaTable {
    /// `beta[j]` is `𝛃_j` (`beta[0]` is unused and zero).
    pub beta: Vec<CMat>,
    /// `lambda[m]` is `Λ_m`.
    pub lambda: Vec<CMat>,
    /// `omega[j]` is `Ω_j`.
    pub omega: Vec<CMat>,
    il: CMat,
    p_perp: CMat,
}

/// `𝛃_j = diag(0, β_{j,−}(0), −β_{j,+}(l))` for `j = 0..=max`.
pub fn boundary_betas(qg: &QuantumGraph, max: usize) -> Vec<CMat> {
    let g = &qg.graph;
    let n = g.e();
    let tables: Vec<BetaTable> =
        qg.edge_potentials().iter().map(|v| BetaTable::new(&v.poly, max.max(1))).collect();
    (0..=max)
        .map(|j| {
            let mut b = CMat::zeros(n, n);
            if j == 0 {
                return b;
            }
            for (e, t) in tables.iter().enumerate() {
                let (s0, sl) = g.internal_slots(e);
                let l = qg.edge_potential(e).length;
                b[(s0, s0)] = t.beta(j as i32, false).eval(0.0);
                b[(sl, sl)] = -t.beta(j as i32, true).eval(l);
            }
            b
        })
        .collect()
}

impl OmegaTable {
    pub fn new(qg: &QuantumGraph, order: usize) -> Self {
        let n = qg.graph.e();
        let il = &qg.conditions.l * I;
        let p_perp = qg.conditions.p_perp();
        let beta = boundary_betas(qg, order.max(1));
        // Ω_j needs Λ_m for m ≤ j − 2, hence 𝛃 up to order − 1.
        let lambda: Vec<CMat> = (0..order.max(1))
            .map(|m| {
                (0..=m).fold(CMat::zeros(n, n), |acc, nn| {
                    acc + pow(&il, nn) * &p_perp * conj(&beta[m - nn + 1])
                })
            })
            .collect();
        let mut table = OmegaTable { beta, lambda, omega: Vec::new(), il, p_perp };
        table.omega = (0..=order)
            .map(|j| {
                if j == 0 {
                    return identity(n);
                }
                let mut o = CMat::zeros(n, n);
                let mut nn = 1;
                while 2 * nn <= j {
                    let r = j - 2 * nn;
                    o += table.lambda_nr(nn, r) * I.powu(nn as u32);
                    nn += 1;
                }
                o
            })
            .collect();
        table
    }

    /// `Λ_{n,r} = Σ_{|m| = r} Π Λ_{m_i}` over multi-indices `m ∈ ℕ₀ⁿ`.
    pub fn lambda_nr(&self, n: usize, r: usize) -> CMat {
        let dim = self.il.nrows();
        compositions(n, r).into_iter().fold(CMat::zeros(dim, dim), |acc, m| {
            acc + m.iter().fold(identity(dim), |p, &mi| p * &self.lambda[mi])
        })
    }
}

/// `𝔖_∞` and `𝔖_1, …, 𝔖_order`.
#[derive(Clone, Debug)]
pub struct SMatrixSeries {
    pub s_inf: CMat,
    /// `terms[m − 1]` is `𝔖_m`.
    pub terms: Vec<CMat>,
}

impl SMatrixSeries {
    /// `𝔖_∞ + Σ_{m ≤ n} k^{−m} 𝔖_m`.
    pub fn partial_sum(&self, k: C64, n: usize) -> CMat {
        self.terms.iter().take(n).enumerate().fold(self.s_inf.clone(), |acc, (i, t)| {
            acc + t * k.powi(-(i as i32 + 1))
        })
    }
}

/// The 𝔖-matrix expansion from the general `Ω` machinery.
pub fn smatrix_series(qg: &QuantumGraph, order: usize) -> SMatrixSeries {
    assert!(order <= MAX_SMATRIX_ORDER, "𝔖-matrix expansion is available up to order {MAX_SMATRIX_ORDER}");
    let n = qg.graph.e();
    let t = OmegaTable::new(qg, order);
    let s_inf = identity(n) - &qg.conditions.p * c(2.0, 0.0);
    let terms = (1..=order)
        .map(|m| {
            let mut s = &t.omega[m] * &s_inf;
            for nn in 1..=m {
                s += &t.omega[m - nn] * pow(&t.il, nn) * c(2.0, 0.0);
            }
            if m >= 2 {
                for r in 0..=m - 2 {
                    for nb in 0..=m - 2 - r {
                        let l = m - 2 - r - nb;
                        s += &t.omega[l] * pow(&t.il, r) * &t.p_perp * &t.beta[nb + 1] * I;
                    }
                }
            }
            s
        })
        .collect();
    SMatrixSeries { s_inf, terms }
}

/// `𝔖_1`, `𝔖_2`, `𝔖_3` from their closed forms.
pub fn smatrix_closed_forms(qg: &QuantumGraph) -> [CMat; 3] {
    let p = &qg.conditions.p;
    let l = &qg.conditions.l;
    let pp = qg.conditions.p_perp();
    let b = boundary_betas(qg, 2);
    let two = c(2.0, 0.0);
    let s1 = l * (I * two);
    let s2 = (&pp * &b[1] * p * I - l * l) * two;
    let s3 = (&pp * &b[1] * l - l * &b[1] * p + &pp * &b[2] * &pp * I - l * l * l * I) * two;
    [s1, s2, s3]
}
