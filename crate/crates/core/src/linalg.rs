//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag(d: &[C64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(d))
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm.
pub fn norm2(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Reciprocal 2-norm condition number, `σ_min / σ_max` (1 for empty matrices).
pub fn rcond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        (Some(_), Some(_)) => 0.0,
        _ => 1.0,
    }
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Solves `a x = b`.
pub fn solve(a: &CMat, b: &CMat, what: &str) -> Result<CMat> {
    if a.is_empty() {
        return Ok(b.clone());
    }
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or_else(|| Error::Singular(what.to_string()))?;
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular(what.to_string()));
    }
    Ok(x)
}

pub fn determinant(m: &CMat) -> C64 {
    if m.is_empty() {
        return real(1.0);
    }
    m.clone().lu().determinant()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// `‖A − A*‖` measured entrywise.
pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn pow(m: &CMat, n: usize) -> CMat {
    (0..n).fold(identity(m.nrows()), |acc, _| &acc * m)
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}
