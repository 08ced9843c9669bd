//! Spectra, resolvent kernels and heat-trace asymptotics of Schrödinger
//! operators `H = −Δ + V` on metric graphs.

pub mod asymptotics;
pub mod error;
pub mod fundamental;
pub mod graph;
pub mod heat;
pub mod linalg;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod quantum;
pub mod resolvent;
pub mod secular;
pub mod spectrum;

pub use asymptotics::{resolvent_trace_coeffs, smatrix_series, TraceCoefficients};
pub use error::{Error, Result};
pub use fundamental::{FundamentalPair, Normalisation};
pub use graph::{ConditionKind, GraphDescription, GraphPoint, MetricGraph, VertexConditions};
pub use linalg::{CMat, C64};
pub use ode::Tolerances;
pub use potential::{EdgePotential, Polynomial, Potentials};
pub use quantum::QuantumGraph;
pub use resolvent::{regularized_trace, Regularization, TraceOptions};
pub use spectrum::{find_eigenvalues, Eigenvalue, SpectralResult, SpectrumOptions};
