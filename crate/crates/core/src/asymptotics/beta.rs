//! WKB coefficients `β_{l,±}` of the log-derivative of the fundamental
//! solutions, `u±′/u± ~ Σ_{l≥−1} k^{−l} β_{l,±}`, and the derived `w_l`.

use std::ops::{Add, Mul};

use serde::Serialize;

use crate::linalg::{c, C64};
use crate::potential::Polynomial;

/// A real polynomial times `1` or `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IPoly {
    pub imaginary: bool,
    pub poly: Polynomial,
}

impl IPoly {
    pub fn real(poly: Polynomial) -> Self {
        IPoly { imaginary: false, poly }
    }

    pub fn imag(poly: Polynomial) -> Self {
        IPoly { imaginary: true, poly }
    }

    pub fn zero() -> Self {
        IPoly::real(Polynomial::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn eval(&self, x: f64) -> C64 {
        let v = self.poly.eval(x);
        if self.imaginary {
            c(0.0, v)
        } else {
            c(v, 0.0)
        }
    }

    pub fn derivative(&self) -> IPoly {
        IPoly { imaginary: self.imaginary, poly: self.poly.derivative() }
    }

    pub fn antiderivative(&self) -> IPoly {
        IPoly { imaginary: self.imaginary, poly: self.poly.antiderivative() }
    }

    pub fn scale(&self, s: f64) -> IPoly {
        IPoly { imaginary: self.imaginary, poly: self.poly.scale(s) }
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> IPoly {
        if self.imaginary {
            IPoly::real(self.poly.scale(-1.0))
        } else {
            IPoly::imag(self.poly.clone())
        }
    }

    /// Multiplication by `iⁿ`.
    pub fn times_i_pow(&self, n: usize) -> IPoly {
        (0..n % 4).fold(self.clone(), |p, _| p.times_i())
    }
}

impl Add for &IPoly {
    type Output = IPoly;
    fn add(self, rhs: &IPoly) -> IPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        assert_eq!(
            self.imaginary, rhs.imaginary,
            "adding a real and an imaginary polynomial breaks the parity structure"
        );
        IPoly { imaginary: self.imaginary, poly: &self.poly + &rhs.poly }
    }
}

impl Mul for &IPoly {
    type Output = IPoly;
    fn mul(self, rhs: &IPoly) -> IPoly {
        let poly = &self.poly * &rhs.poly;
        match (self.imaginary, rhs.imaginary) {
            (true, true) => IPoly::real(poly.scale(-1.0)),
            (a, b) => IPoly { imaginary: a ^ b, poly },
        }
    }
}

/// `β_{l,+}` and `β_{l,−}` for `l = −1, …, order` on one edge.
#[derive(Clone, Debug)]
pub struct BetaTable {
    plus: Vec<IPoly>,
    minus: Vec<IPoly>,
}

fn recursion(v: &Polynomial, sign: f64, order: usize) -> Vec<IPoly> {
    // Index shift: entry i holds β_{i−1}.
    let mut b = vec![
        IPoly::imag(Polynomial::constant(sign)),
        IPoly::zero(),
        IPoly::imag(v.scale(-0.5 * sign)),
    ];
    for l in 1..order.max(1) {
        let mut s = b[l + 1].derivative();
        for j in 0..=l {
            s = &s + &(&b[j + 1] * &b[l - j + 1]);
        }
        b.push(s.times_i().scale(0.5 * sign));
    }
    b.truncate(order + 2);
    b
}

impl BetaTable {
    pub fn new(v: &Polynomial, order: usize) -> Self {
        BetaTable { plus: recursion(v, 1.0, order), minus: recursion(v, -1.0, order) }
    }

    pub fn order(&self) -> usize {
        self.plus.len() - 2
    }

    /// `β_{l,±}` for `−1 ≤ l ≤ order`.
    pub fn beta(&self, l: i32, plus: bool) -> &IPoly {
        let t = if plus { &self.plus } else { &self.minus };
        &t[(l + 1) as usize]
    }
}

/// `β_{l,±}` of an edge potential.
pub fn beta(v: &Polynomial, l: i32, plus: bool) -> IPoly {
    assert!(l >= -1);
    BetaTable::new(v, l.max(1) as usize).beta(l, plus).clone()
}

/// Multi-indices `m ∈ ℕ₀ⁿ` with `|m| = total`.
pub(crate) fn compositions(n: usize, total: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(n - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `w_l = Σ_{n=1}^{l} Σ_{|m|=l−n} iⁿ Π_j β_{2m_j+1,+}`, `w_0 = 1`.
pub fn w_coeff(v: &Polynomial, l: usize) -> IPoly {
    if l == 0 {
        return IPoly::real(Polynomial::constant(1.0));
    }
    let table = BetaTable::new(v, 2 * l + 1);
    let mut w = IPoly::zero();
    for n in 1..=l {
        for m in compositions(n, l - n) {
            let prod = m.iter().fold(IPoly::real(Polynomial::constant(1.0)), |acc, &mj| {
                &acc * table.beta(2 * mj as i32 + 1, true)
            });
            w = &w + &prod.times_i_pow(n);
        }
    }
    w
}

/// Coefficients of `k^{−(2l+1)}`, `l = 0..=order`, in the expansion of the
/// diagonal free kernel `u⁺u⁻/(u⁺u⁻′ − u⁺′u⁻) ~ −(1/2i) Σ k^{−2l−1} w_l`.
pub fn inverse_wronskian_series(v: &Polynomial, order: usize) -> Vec<(i32, IPoly)> {
    // −1/(2i) = i/2.
    (0..=order)
        .map(|l| (2 * l as i32 + 1, w_coeff(v, l).times_i().scale(0.5)))
        .collect()
}

/// `exp(Σ_{l=−1}^{N} k^{−l} ∫₀ˣ β_{l,+})`: the truncated WKB solution
/// normalised to 1 at `x = 0`.
#[derive(Clone, Debug)]
pub struct WkbReference {
    k: C64,
    integrals: Vec<(i32, IPoly)>,
}

impl WkbReference {
    pub fn new(v: &Polynomial, k: C64, order: usize) -> Self {
        let table = BetaTable::new(v, order);
        let integrals = (-1..=order as i32)
            .map(|l| (l, table.beta(l, true).antiderivative()))
            .collect();
        WkbReference { k, integrals }
    }

    pub fn log(&self, x: f64) -> C64 {
        self.integrals.iter().map(|(l, p)| self.k.powi(-l) * p.eval(x)).sum()
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.log(x).exp()
    }
}

/// Truncated WKB log-derivative `Σ_{l=1}^{n} k^{−l} β_{l,±}(x)`, with `n ≤
/// order` chosen at the smallest term so the series is not pushed past the
/// point where it starts to diverge.
pub fn wkb_log_derivative_tail(table: &BetaTable, k: C64, x: f64, plus: bool) -> C64 {
    let mut sum = c(0.0, 0.0);
    let mut last = f64::INFINITY;
    for l in 1..=table.order() as i32 {
        let term = table.beta(l, plus).eval(x) * k.powi(-l);
        let size = term.norm();
        if l > 1 && size > last {
            break;
        }
        sum += term;
        if size != 0.0 {
            last = size;
        }
    }
    sum
}
