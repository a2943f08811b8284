//! Numerical laboratory for `dX_t = dS_t + a(t, X_t) dt` driven by a
//! one-dimensional Lévy process `S` with a bounded measurable drift `a`.
//!
//! * [`levy`]: characteristic exponents, the growth condition
//!   `Re ψ(ξ)/|ξ| → ∞`, and the constants `λ₀`, `N₁`.
//! * [`sampler`]: exact and truncated increment samplers on seeded streams.
//! * [`drift`]: bounded drifts, bump-kernel mollification, test functions.
//! * [`sde`]: coupled Euler paths and exit times.
//! * [`krylov`]: Monte Carlo checks of the L₂ occupation estimates against a
//!   Fourier resolvent oracle.
//! * [`convergence`]: the mollification ladder and tightness diagnostics.

pub mod convergence;
pub mod drift;
pub mod error;
pub mod fourier;
pub mod krylov;
pub mod levy;
pub mod quadrature;
pub mod sampler;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
