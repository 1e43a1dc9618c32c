//! Fractional Laplacians of Japanese-bracket weights and general functions.

mod function;
mod grid;
mod iterated;
mod kernel;
mod lemmas;
mod order;
mod quadrature;
mod weight;

pub use function::{BracketSum, FnProfile, Scaled, SpatialFunction};
pub use grid::{GridField, TorusGrid};
pub use iterated::{iterated_laplacian, laplacian_weight_step, printed_closed_form};
pub use kernel::{kernel_constant, sphere_area};
pub use lemmas::{
    decay_majorant, fractional_laplacian_of_weight, majorant_is_sharp, verify_decay_lemma, verify_scaling, DecayCase,
    DecayReport, DecaySample, ScalingReport, ScalingSample,
};
pub use order::FractionalOrder;
pub use quadrature::{fractional_laplacian_quadrature, QuadResult, QuadratureScheme};
pub use weight::{bracket, weight_partial_derivative, DerivativeTerm, RadialWeight};

/// Tolerance used to decide whether a real parameter is an integer, or whether
/// two exponents coincide.
pub const INTEGER_TOL: f64 = 1e-9;

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
