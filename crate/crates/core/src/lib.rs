//! Damped wave equations u_tt − λ(t)²Δu + b(t)u_t = f(t, u) with
//! scale-invariant damping b = μλ/Λ − λ′/λ: exact Fourier multipliers,
//! a pseudospectral solver and decay analysis.

pub mod analysis;
pub mod config;
pub mod error;
pub mod multipliers;
pub mod ode;
pub mod profiles;
pub mod quadrature;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
