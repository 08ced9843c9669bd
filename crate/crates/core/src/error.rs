use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid conditions at vertex {vertex}: {reason}")]
    InvalidConditions { vertex: VertexId, reason: String },

    #[error("graph needs normalisation: {0}")]
    NeedsNormalisation(String),

    #[error("coordinate {x} outside [0, {length}]")]
    OutOfRange { x: f64, length: f64 },

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("k = {0} lies in the excluded disc around 0")]
    ExcludedDisc(Complex64),

    #[error("ODE integration failed on edge {edge}: {reason}")]
    Integration { edge: EdgeId, reason: String },

    #[error("exponential factor overflows (|Im k|·x = {0})")]
    Overflow(f64),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("k = {k} is too close to the spectrum (reciprocal condition {rcond:e})")]
    NearSpectrum { k: Complex64, rcond: f64 },

    #[error("quadrature did not converge on edge {edge} (last change {change:e})")]
    Quadrature { edge: EdgeId, change: f64 },

    #[error("root refinement did not converge near k = {0}")]
    RootRefinement(f64),

    #[error("spectrum up to {available} is insufficient; need λ_max ≥ {needed}")]
    Truncation { available: f64, needed: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
