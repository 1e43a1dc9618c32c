//! Fractional Laplacian operators, test-function machinery and a pseudo-spectral
//! simulator for the structurally damped σ-evolution equation
//!
//! ```text
//! u_tt + (-Δ)^σ u + (-Δ)^δ u_t = |u|^p,   σ ≥ 1,  0 ≤ δ < σ,  p > 1.
//! ```
//!
//! The crate is split in three layers:
//!
//! - [`fractional`]: Japanese-bracket weights, their exact derivatives and iterated
//!   Laplacians, the hypersingular quadrature for `(-Δ)^s` with `s ∈ (0,1)`, a spectral
//!   torus oracle, and numerical checks of the decay and scaling estimates.
//! - [`testfn`]: exponent bookkeeping (`k⁻`, `k⁺`, critical and lifespan exponents),
//!   the temporal cutoff and spatial weights of the test-function method, and discrete
//!   evaluation of the functionals appearing in the weak formulation.
//! - [`sim`]: an exact-linear Strang-split integrator on a periodic torus with
//!   blow-up detection, decay fits and lifespan sweeps.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fit;
pub mod fractional;
pub mod sim;
pub mod testfn;

pub use error::{Error, Result};
