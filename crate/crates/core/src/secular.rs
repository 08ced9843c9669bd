//! The characteristic matrices `X, Y, Z, D, T, 𝔖, U` at a fixed `k`.
//!
//! Rows of `Z` are boundary slots. Its columns are the coefficients of
//! `ψ = γ e^{ikx}` on external edges and `ψ = α u⁺ + β u⁻` on internal
//! edges, laid out as (γ for each external edge, α for each internal edge,
//! β for each internal edge), which matches the slot groups one to one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fundamental::{FundamentalPair, Normalisation};
use crate::linalg::{c, determinant, identity, inverse, rcond, real, CMat, C64, I};
use crate::ode::Tolerances;
use crate::quantum::QuantumGraph;

/// Below this reciprocal condition number `1 − 𝔖T` is treated as singular.
pub const NEAR_SPECTRUM_RCOND: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SecularMatrices {
    pub k: C64,
    pub mode: Normalisation,
    pub pairs: Vec<FundamentalPair>,
    pub p: CMat,
    pub l: CMat,
    pub p_perp: CMat,
    /// `D(k)`.
    pub d: CMat,
    /// `conj D(conj k)`: `D` with the roles of `u⁺` and `u⁻` exchanged.
    pub d_bar: CMat,
    pub t: CMat,
    /// `𝔖(k)`.
    pub s: CMat,
    /// `P + L + P⊥ conj D(conj k)`.
    pub left: CMat,
    e_ex: usize,
    e_int: usize,
}

/// `−(P + L + ik P⊥)^{-1}(P + L − ik P⊥)`, the vertex scattering matrix of
/// the Laplacian.
pub fn laplacian_smatrix(p: &CMat, l: &CMat, k: C64) -> Result<CMat> {
    let n = p.nrows();
    let pp = identity(n) - p;
    let a = p + l + &pp * (I * k);
    let b = p + l - &pp * (I * k);
    Ok(-inverse(&a, "P + L + ikP⊥")? * b)
}

impl SecularMatrices {
    pub fn assemble(qg: &QuantumGraph, k: C64, mode: Normalisation, tol: Tolerances) -> Result<Self> {
        let g = &qg.graph;
        let pairs: Vec<FundamentalPair> = g
            .internal_edges()
            .par_iter()
            .enumerate()
            .map(|(j, e)| FundamentalPair::solve(e.id, qg.edge_potential(j), k, mode, tol))
            .collect::<Result<_>>()?;
        let (e_ex, e_int) = (g.e_ex(), g.e_int());
        let n = g.e();
        let mut dd = vec![c(0.0, 0.0); n];
        let mut db = vec![c(0.0, 0.0); n];
        let mut t = CMat::zeros(n, n);
        for s in 0..e_ex {
            dd[s] = -I * k;
            db[s] = I * k;
        }
        for (j, pr) in pairs.iter().enumerate() {
            let (s0, sl) = g.internal_slots(j);
            dd[s0] = pr.du_minus0();
            dd[sl] = -pr.log_derivative_plus_l();
            db[s0] = pr.du_plus0();
            db[sl] = -pr.log_derivative_minus_l();
            t[(s0, sl)] = pr.inv_u_minus_l();
            t[(sl, s0)] = pr.u_plus_l();
        }
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(dd));
        let d_bar = CMat::from_diagonal(&nalgebra::DVector::from_vec(db));
        let p = qg.conditions.p.clone();
        let l = qg.conditions.l.clone();
        let p_perp = qg.conditions.p_perp();
        let left = &p + &l + &p_perp * &d_bar;
        let right = &p + &l + &p_perp * &d;
        let s = -inverse(&left, "P + L + P⊥·conj D(conj k) in the 𝔖-matrix")? * right;
        Ok(SecularMatrices { k, mode, pairs, p, l, p_perp, d, d_bar, t, s, left, e_ex, e_int })
    }

    /// Plane-wave normalisation, default tolerances.
    pub fn plane_wave(qg: &QuantumGraph, k: C64) -> Result<Self> {
        SecularMatrices::assemble(qg, k, Normalisation::PlaneWave, Tolerances::default())
    }

    /// Anchored normalisation, default tolerances.
    pub fn anchored(qg: &QuantumGraph, k: C64) -> Result<Self> {
        SecularMatrices::assemble(qg, k, Normalisation::default(), Tolerances::default())
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    fn slots(&self, j: usize) -> (usize, usize) {
        (self.e_ex + j, self.e_ex + self.e_int + j)
    }

    /// `X(k)`: boundary values of the basis functions.
    pub fn x(&self) -> CMat {
        let n = self.dim();
        let mut x = CMat::zeros(n, n);
        for s in 0..self.e_ex {
            x[(s, s)] = real(1.0);
        }
        for (j, pr) in self.pairs.iter().enumerate() {
            let (a, b) = self.slots(j);
            x[(a, a)] = real(1.0);
            x[(a, b)] = real(1.0);
            x[(b, a)] = pr.u_plus_l();
            x[(b, b)] = pr.u_minus_l();
        }
        x
    }

    /// `Y(k)`: inward derivatives of the basis functions.
    pub fn y(&self) -> CMat {
        let n = self.dim();
        let mut y = CMat::zeros(n, n);
        for s in 0..self.e_ex {
            y[(s, s)] = I * self.k;
        }
        for (j, pr) in self.pairs.iter().enumerate() {
            let (a, b) = self.slots(j);
            y[(a, a)] = pr.du_plus0();
            y[(a, b)] = pr.du_minus0();
            y[(b, a)] = -pr.du_plus_l();
            y[(b, b)] = -pr.log_derivative_minus_l() * pr.u_minus_l();
        }
        y
    }

    /// `Z = (P + L) X + P⊥ Y`.
    pub fn z(&self) -> CMat {
        (&self.p + &self.l) * self.x() + &self.p_perp * self.y()
    }

    /// `Z` with the β columns divided by `u⁻(l)`; bounded for `Im k ≥ 0`
    /// and equal to `(P + L + P⊥ conj D(conj k))(1 − 𝔖T)`.
    pub fn z_tilde(&self) -> CMat {
        let (x, y) = self.xy_tilde();
        (&self.p + &self.l) * x + &self.p_perp * y
    }

    /// The two factors `X̃`, `Ỹ` of `Z̃ = (P + L)X̃ + P⊥Ỹ`.
    pub fn xy_tilde(&self) -> (CMat, CMat) {
        let n = self.dim();
        let mut x = CMat::zeros(n, n);
        let mut y = CMat::zeros(n, n);
        for s in 0..self.e_ex {
            x[(s, s)] = real(1.0);
            y[(s, s)] = I * self.k;
        }
        for (j, pr) in self.pairs.iter().enumerate() {
            let (a, b) = self.slots(j);
            let inv = pr.inv_u_minus_l();
            x[(a, a)] = real(1.0);
            x[(a, b)] = inv;
            x[(b, a)] = pr.u_plus_l();
            x[(b, b)] = real(1.0);
            y[(a, a)] = pr.du_plus0();
            y[(a, b)] = pr.du_minus0() * inv;
            y[(b, a)] = -pr.du_plus_l();
            y[(b, b)] = -pr.log_derivative_minus_l();
        }
        (x, y)
    }

    /// `diag(1, 1, u⁻(l))`, the factor relating `Z` and `Z̃`.
    pub fn r1_bar(&self) -> CMat {
        let mut r = identity(self.dim());
        for (j, pr) in self.pairs.iter().enumerate() {
            let (_, b) = self.slots(j);
            r[(b, b)] = pr.u_minus_l();
        }
        r
    }

    pub fn one_minus_st(&self) -> CMat {
        identity(self.dim()) - &self.s * &self.t
    }

    /// `U = R^{-1} 𝔖 T R` with `R = diag(1, 1, |u⁺(l)|)`; unitary for real
    /// `k` in the plane-wave normalisation.
    pub fn u(&self) -> CMat {
        let n = self.dim();
        let mut r = vec![1.0; n];
        for (j, pr) in self.pairs.iter().enumerate() {
            let (_, b) = self.slots(j);
            r[b] = pr.u_plus_l().norm();
        }
        let st = &self.s * &self.t;
        CMat::from_fn(n, n, |a, b| st[(a, b)] * (r[b] / r[a]))
    }

    pub fn one_minus_u(&self) -> CMat {
        identity(self.dim()) - self.u()
    }

    pub fn det_z(&self) -> C64 {
        determinant(&self.z())
    }

    pub fn det_z_tilde(&self) -> C64 {
        determinant(&self.z_tilde())
    }

    pub fn det_one_minus_u(&self) -> C64 {
        determinant(&self.one_minus_u())
    }

    /// `M = (1 − 𝔖T)^{-1} 𝔖`, the middle factor of the resolvent kernel.
    pub fn middle(&self) -> Result<CMat> {
        let a = self.one_minus_st();
        let rc = rcond(&a);
        if rc < NEAR_SPECTRUM_RCOND {
            return Err(Error::NearSpectrum { k: self.k, rcond: rc });
        }
        crate::linalg::solve(&a, &self.s, "1 − 𝔖T")
    }
}

/// `det Z(k)` in the plane-wave normalisation.
pub fn secular_det(qg: &QuantumGraph, k: C64) -> Result<C64> {
    Ok(SecularMatrices::plane_wave(qg, k)?.det_z())
}
