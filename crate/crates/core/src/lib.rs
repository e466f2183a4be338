//! Spectral functional calculus for the abstract damped wave equation
//! `u_tt + A u + u_t = F(u)` on discretized non-negative self-adjoint operators.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: operator backends (Dirichlet interval, spectral fractional
//!   powers, dense symmetric matrices, Sierpinski prefractals) with unitary
//!   transforms and norm evaluation.
//! - [`kernels`]: the damped-wave multiplier `D(t, λ)`, its time derivatives,
//!   the heat symbol, the step integral and the diffusion-difference symbol.
//! - [`evolution`]: exact linear propagation, heat flow, and an exponential
//!   integrator for the semilinear problem.
//! - [`analysis`]: decay fits, predicted exponents, criticality conditions,
//!   weighted norms, kernel scans and inequality checks.
//! - [`experiments`]: end-to-end studies built on the above.
//! - [`config`] and [`output`]: JSON configuration and deterministic CSV/JSON emission.

pub mod analysis;
pub mod config;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod kernels;
pub mod output;
pub mod spectral;

pub use error::{Error, Result};
