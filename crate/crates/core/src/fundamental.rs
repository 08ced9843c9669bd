//! Fundamental solutions `u±(k; x)` of `−u″ + V u = k² u` on one edge.
//!
//! Solutions are stored in scaled form `u±(x) = e^{±ikx} w±(x)`, where `w±`
//! solves `w″ = ∓2ik w′ + V w`. Only `w±` is integrated, so `Im k · l` of
//! several hundred is harmless as long as callers combine the exponential
//! factors before evaluating them.

use crate::asymptotics::beta::{wkb_log_derivative_tail, BetaTable, WkbReference};
use crate::error::{Error, Result};
use crate::graph::EdgeId;
use crate::linalg::{c, C64, I};
use crate::ode::{integrate, State, Tolerances};
use crate::potential::{EdgePotential, Polynomial};

/// Radius of the disc around `k = 0` that is excluded everywhere.
pub const EXCLUDED_RADIUS: f64 = 1e-3;

/// Exponent beyond which `e^{|Im k| x}` is considered to overflow.
const OVERFLOW_EXPONENT: f64 = 700.0;

/// How the pair is normalised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalisation {
    /// `u±(0) = 1`, `u±′(0) = ±ik`, so `W = 2ik` exactly. Used on the real
    /// axis, where `conj u⁺ = u⁻`.
    PlaneWave,
    /// `u⁻` starts at `x = 0` and `u⁺` at `x = l`, each with the truncated
    /// WKB log-derivative as initial slope, and both are rescaled so that
    /// `u±(0) = 1`. Each solution is integrated in the direction in which it
    /// grows, which keeps large `Im k` well conditioned and makes the
    /// endpoint log-derivatives follow their WKB expansions.
    Anchored { wkb_order: usize },
}

impl Default for Normalisation {
    fn default() -> Self {
        Normalisation::Anchored { wkb_order: 8 }
    }
}

/// Scaled values at one point: `w±` and `w±′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledSample {
    pub x: f64,
    pub wp: C64,
    pub dwp: C64,
    pub wm: C64,
    pub dwm: C64,
}

#[derive(Clone, Debug)]
pub struct FundamentalPair {
    pub edge: EdgeId,
    pub k: C64,
    pub length: f64,
    pub mode: Normalisation,
    poly: Polynomial,
    tol: Tolerances,
    /// Initial state of the `w⁺` integration and where it starts.
    plus_start: (f64, State),
    /// Factor applied to the raw `w⁺` so that `w⁺(0) = 1`.
    plus_scale: C64,
    minus_start: State,
    /// `(w⁺, w⁺′)` at 0 and l.
    plus0: State,
    plus_l: State,
    minus0: State,
    minus_l: State,
}

fn rhs(poly: &Polynomial, sigma: f64, k: C64) -> impl Fn(f64, &State) -> State + '_ {
    let a = I * k * (-2.0 * sigma);
    move |x, y| [y[1], a * y[1] + y[0] * poly.eval(x)]
}

fn initial_step(k: C64, length: f64) -> f64 {
    length.min(1.0 / (1.0 + k.norm()))
}

impl FundamentalPair {
    pub fn solve(
        edge: EdgeId,
        v: &EdgePotential,
        k: C64,
        mode: Normalisation,
        tol: Tolerances,
    ) -> Result<Self> {
        if k.norm() < EXCLUDED_RADIUS {
            return Err(Error::ExcludedDisc(k));
        }
        let l = v.length;
        let poly = v.poly.clone();
        if mode == Normalisation::PlaneWave && !poly.is_zero() {
            let e = 2.0 * k.im.abs() * l;
            if e > OVERFLOW_EXPONENT {
                return Err(Error::Overflow(e));
            }
        }
        let (slope_minus, slope_plus) = match mode {
            Normalisation::PlaneWave => (c(0.0, 0.0), c(0.0, 0.0)),
            Normalisation::Anchored { wkb_order } => {
                let (lo, hi) = v.range();
                let vmax = lo.abs().max(hi.abs());
                if k.norm_sqr() < 4.0 * (1.0 + vmax) || wkb_order == 0 {
                    (c(0.0, 0.0), c(0.0, 0.0))
                } else {
                    let table = BetaTable::new(&poly, wkb_order);
                    (
                        wkb_log_derivative_tail(&table, k, 0.0, false),
                        wkb_log_derivative_tail(&table, k, l, true),
                    )
                }
            }
        };
        let h0 = initial_step(k, l);
        let fail = |reason: String| Error::Integration { edge, reason };

        let minus_start = [c(1.0, 0.0), slope_minus];
        let minus = integrate(rhs(&poly, -1.0, k), 0.0, minus_start, &[l], tol, h0).map_err(fail)?;
        let minus_l = minus[0];

        let (plus_start, plus_scale, plus0, plus_l) = match mode {
            Normalisation::PlaneWave => {
                let start = [c(1.0, 0.0), c(0.0, 0.0)];
                let out = integrate(rhs(&poly, 1.0, k), 0.0, start, &[l], tol, h0).map_err(fail)?;
                ((0.0, start), c(1.0, 0.0), start, out[0])
            }
            Normalisation::Anchored { .. } => {
                let seed = |slope: C64| -> Result<(State, State)> {
                    let start = [c(1.0, 0.0), slope];
                    let out = integrate(rhs(&poly, 1.0, k), l, start, &[0.0], tol, h0).map_err(fail)?;
                    Ok((start, out[0]))
                };
                // Away from the WKB regime the backward solution can coincide
                // with u⁻ (a Robin-type eigenvalue of the edge) or vanish at
                // 0; other end slopes then restore a usable pair. The score
                // is the scale-free Wronskian, zero when w⁺(0) is negligible.
                let kn = k.norm();
                let score = |raw0: &State| {
                    let size = raw0[0].norm() + raw0[1].norm() / kn;
                    if !(size.is_finite() && raw0[0].norm() >= 0.05 * size) {
                        return 0.0;
                    }
                    (raw0[1] - raw0[0] * slope_minus + 2.0 * I * k * raw0[0]).norm() / (kn * size)
                };
                let mut best: Option<(State, State, f64)> = None;
                for slope in [slope_plus, -I * k, -2.0 * I * k] {
                    let Ok((start, raw0)) = seed(slope) else { continue };
                    let q = score(&raw0);
                    if best.as_ref().is_none_or(|b| q > b.2) {
                        best = Some((start, raw0, q));
                    }
                    if q >= 0.5 {
                        break;
                    }
                }
                let (start, raw0, q) = best.ok_or_else(|| fail("no usable seed for w⁺".into()))?;
                if q == 0.0 {
                    return Err(fail("w⁺ vanishes at x = 0".into()));
                }
                let s = raw0[0].inv();
                ((l, start), s, [c(1.0, 0.0), raw0[1] * s], [start[0] * s, start[1] * s])
            }
        };
        for z in plus_l.iter().chain(&minus_l).chain(&plus0) {
            if !z.is_finite() {
                return Err(Error::Overflow(k.im.abs() * l));
            }
        }
        let pair = FundamentalPair {
            edge,
            k,
            length: l,
            mode,
            poly,
            tol,
            plus_start,
            plus_scale,
            minus_start,
            plus0,
            plus_l,
            minus0: minus_start,
            minus_l,
        };
        let w = pair.wronskian();
        if w.norm() < 1e-12 * k.norm() {
            return Err(Error::Singular(format!(
                "fundamental solutions on edge {edge} are linearly dependent at k = {k}"
            )));
        }
        Ok(pair)
    }

    /// Plane-wave pair with default tolerances.
    pub fn plane_wave(edge: EdgeId, v: &EdgePotential, k: C64) -> Result<Self> {
        FundamentalPair::solve(edge, v, k, Normalisation::PlaneWave, Tolerances::default())
    }

    /// `W = u⁺′u⁻ − u⁺u⁻′`, evaluated at `x = 0`.
    pub fn wronskian(&self) -> C64 {
        self.du_plus0() - self.du_minus0()
    }

    /// The Wronskian evaluated from the data at `x = l`; equal to
    /// [`wronskian`](Self::wronskian) up to integration error.
    pub fn wronskian_at_end(&self) -> C64 {
        let [wp, dwp] = self.plus_l;
        let [wm, dwm] = self.minus_l;
        dwp * wm - wp * dwm + 2.0 * I * self.k * wp * wm
    }

    /// `u⁺′(0)`.
    pub fn du_plus0(&self) -> C64 {
        self.plus0[1] + I * self.k
    }

    /// `u⁻′(0)`.
    pub fn du_minus0(&self) -> C64 {
        self.minus0[1] - I * self.k
    }

    /// `e^{ikl}`.
    pub fn phase(&self) -> C64 {
        (I * self.k * self.length).exp()
    }

    /// `u⁺(l) = e^{ikl} w⁺(l)`.
    pub fn u_plus_l(&self) -> C64 {
        self.phase() * self.plus_l[0]
    }

    /// `u⁺′(l)`.
    pub fn du_plus_l(&self) -> C64 {
        self.phase() * (self.plus_l[1] + I * self.k * self.plus_l[0])
    }

    /// `1 / u⁻(l) = e^{ikl} / w⁻(l)`.
    pub fn inv_u_minus_l(&self) -> C64 {
        self.phase() / self.minus_l[0]
    }

    /// `u⁻(l)`; may overflow for large `Im k · l`.
    pub fn u_minus_l(&self) -> C64 {
        self.minus_l[0] / self.phase()
    }

    /// `u⁺′(l) / u⁺(l)`.
    pub fn log_derivative_plus_l(&self) -> C64 {
        self.plus_l[1] / self.plus_l[0] + I * self.k
    }

    /// `u⁻′(l) / u⁻(l)`.
    pub fn log_derivative_minus_l(&self) -> C64 {
        self.minus_l[1] / self.minus_l[0] - I * self.k
    }

    /// Scaled endpoint data `(w⁺, w⁺′)` at 0 and l.
    pub fn plus_ends(&self) -> (State, State) {
        (self.plus0, self.plus_l)
    }

    /// Scaled endpoint data `(w⁻, w⁻′)` at 0 and l.
    pub fn minus_ends(&self) -> (State, State) {
        (self.minus0, self.minus_l)
    }

    /// `w±`, `w±′` at ascending points of `[0, l]`, obtained by integrating
    /// again through the points.
    pub fn samples(&self, xs: &[f64]) -> Result<Vec<ScaledSample>> {
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        for &x in xs {
            if !(0.0..=self.length).contains(&x) {
                return Err(Error::OutOfRange { x, length: self.length });
            }
        }
        if xs.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::Unsupported("sample points must be ascending".into()));
        }
        let fail = |reason: String| Error::Integration { edge: self.edge, reason };
        let h0 = initial_step(self.k, self.length);
        let minus = integrate(rhs(&self.poly, -1.0, self.k), 0.0, self.minus_start, xs, self.tol, h0)
            .map_err(fail)?;
        let (x0, start) = self.plus_start;
        let plus: Vec<State> = if x0 == 0.0 {
            integrate(rhs(&self.poly, 1.0, self.k), 0.0, start, xs, self.tol, h0).map_err(fail)?
        } else {
            let rev: Vec<f64> = xs.iter().rev().copied().collect();
            let mut out = integrate(rhs(&self.poly, 1.0, self.k), x0, start, &rev, self.tol, h0)
                .map_err(fail)?;
            out.reverse();
            out
        };
        Ok(xs
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(&x, (p, m))| ScaledSample {
                x,
                wp: p[0] * self.plus_scale,
                dwp: p[1] * self.plus_scale,
                wm: m[0],
                dwm: m[1],
            })
            .collect())
    }

    /// `(u⁺(x), u⁺′(x), u⁻(x), u⁻′(x))` at one point, unscaled.
    pub fn eval(&self, x: f64) -> Result<[C64; 4]> {
        let s = self.samples(&[x])?[0];
        let ik = I * self.k;
        let (ep, em) = ((ik * x).exp(), (-ik * x).exp());
        if !em.is_finite() {
            return Err(Error::Overflow(self.k.im.abs() * x));
        }
        Ok([ep * s.wp, ep * (s.dwp + ik * s.wp), em * s.wm, em * (s.dwm - ik * s.wm)])
    }
}

/// `x ↦ exp(Σ_{l=−1}^{N} k^{−l} ∫₀ˣ β_{l,+})`.
pub fn wkb_reference(v: &Polynomial, k: C64, order: usize) -> WkbReference {
    WkbReference::new(v, k, order)
}
