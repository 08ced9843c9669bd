//! Polynomial edge potentials.
//!
//! Every internal edge carries a real polynomial on `[0, l_e]`. Derivatives,
//! antiderivatives and products are exact coefficient manipulations, which is
//! what the WKB recursion in [`crate::asymptotics`] relies on.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeId;

/// Real polynomial stored with ascending coefficients and no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `x ↦ x`.
    pub fn x() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Polynomial {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| a / (i + 1) as f64),
        );
        Polynomial::new(c)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let p = self.antiderivative();
        p.eval(b) - p.eval(a)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `x ↦ p(x + h)`.
    pub fn shift(&self, h: f64) -> Polynomial {
        // Horner in the polynomial ring: p(x+h) = (...(c_n (x+h) + c_{n-1})(x+h) + ...).
        let xh = Polynomial::new(vec![h, 1.0]);
        self.coeffs.iter().rev().fold(Polynomial::zero(), |acc, &c| {
            &(&acc * &xh) + &Polynomial::constant(c)
        })
    }

    /// Lower and upper bounds of `p` on `[a, b]`, from the endpoints and the
    /// roots of `p'` located by sampling and bisection.
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        if self.degree().unwrap_or(0) < 2 {
            return (lo, hi);
        }
        let d = self.derivative();
        let n = 64 * self.coeffs.len();
        let step = (b - a) / n as f64;
        for i in 0..n {
            let (mut x0, mut x1) = (a + step * i as f64, a + step * (i + 1) as f64);
            let (mut f0, f1) = (d.eval(x0), d.eval(x1));
            if f0 == 0.0 || f0.signum() != f1.signum() {
                for _ in 0..80 {
                    let xm = 0.5 * (x0 + x1);
                    let fm = d.eval(xm);
                    if fm.signum() == f0.signum() && fm != 0.0 {
                        x0 = xm;
                        f0 = fm;
                    } else {
                        x1 = xm;
                    }
                }
                let v = self.eval(0.5 * (x0 + x1));
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

/// A polynomial potential restricted to one internal edge `[0, length]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePotential {
    pub poly: Polynomial,
    pub length: f64,
}

impl EdgePotential {
    pub fn new(poly: Polynomial, length: f64) -> Self {
        EdgePotential { poly, length }
    }

    fn check(&self, x: f64) -> Result<()> {
        // Allow a few ulps of slack so that quadrature nodes computed as
        // `a + (b - a) * s` never trip the range check.
        let slack = 8.0 * f64::EPSILON * self.length.max(1.0);
        if x < -slack || x > self.length + slack || x.is_nan() {
            return Err(Error::OutOfRange {
                x,
                length: self.length,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.poly.eval(x))
    }

    pub fn derivative(&self, n: usize) -> EdgePotential {
        EdgePotential::new(self.poly.nth_derivative(n), self.length)
    }

    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        if a > b {
            return Err(Error::OutOfRange {
                x: a,
                length: self.length,
            });
        }
        Ok(self.poly.integrate(a, b))
    }

    /// `∫₀ˡ V`.
    pub fn total(&self) -> f64 {
        self.poly.integrate(0.0, self.length)
    }

    /// Value at the vertex end `x = 0` or `x = l`.
    pub fn at_end(&self, finish: bool) -> f64 {
        self.poly.eval(if finish { self.length } else { 0.0 })
    }

    /// Derivative at an end, taken in the direction pointing from the vertex
    /// into the edge: `V′(0)` at the start, `−V′(l)` at the finish.
    pub fn derivative_from_vertex(&self, finish: bool) -> f64 {
        let d = self.poly.derivative();
        if finish {
            -d.eval(self.length)
        } else {
            d.eval(0.0)
        }
    }

    pub fn range(&self) -> (f64, f64) {
        self.poly.range_on(0.0, self.length)
    }
}

/// Potential of an external edge, zero beyond `support`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalPotential {
    pub poly: Polynomial,
    pub support: Option<f64>,
}

/// Potentials of a whole graph. Edges without an entry carry `V = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Potentials {
    pub internal: BTreeMap<EdgeId, Polynomial>,
    pub external: BTreeMap<EdgeId, ExternalPotential>,
}

impl Potentials {
    pub fn zero() -> Self {
        Potentials::default()
    }

    /// The same polynomial on every listed internal edge.
    pub fn uniform(edges: impl IntoIterator<Item = EdgeId>, poly: &Polynomial) -> Self {
        Potentials {
            internal: edges.into_iter().map(|e| (e, poly.clone())).collect(),
            external: BTreeMap::new(),
        }
    }

    pub fn with(mut self, edge: EdgeId, poly: Polynomial) -> Self {
        self.internal.insert(edge, poly);
        self
    }

    pub fn internal_poly(&self, edge: EdgeId) -> Polynomial {
        self.internal.get(&edge).cloned().unwrap_or_default()
    }

    pub fn has_external(&self) -> bool {
        self.external.values().any(|p| !p.poly.is_zero())
    }
}
