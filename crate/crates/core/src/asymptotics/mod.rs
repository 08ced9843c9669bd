//! Symbolic large-`k` expansions: WKB coefficients, the 𝔖-matrix series and
//! the resolvent and heat-trace coefficients.

pub mod beta;
pub mod coefficients;
pub mod omega;

pub use beta::{beta, inverse_wronskian_series, w_coeff, BetaTable, IPoly, WkbReference};
pub use coefficients::{heat_from_resolvent, resolvent_trace_coeffs, vertex_integral_series, TraceCoefficients};
pub use omega::{boundary_betas, smatrix_closed_forms, smatrix_series, OmegaTable, SMatrixSeries};
