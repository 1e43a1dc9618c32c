use std::fmt;

use super::norm;
use super::weight::RadialWeight;

/// A bounded function on `ℝⁿ` that the hypersingular quadrature can sample.
///
/// Besides point values the quadrature needs a few structural hints: a global bound,
/// a bound beyond a radius (for the far-field tail), the length scale of features
/// around the origin, and optionally an oscillation length.
pub trait SpatialFunction: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// An upper bound for `sup |f|`.
    fn sup_abs(&self) -> f64;

    /// Limit of `f` at infinity (assumed to exist).
    fn far_field(&self) -> f64 {
        0.0
    }

    /// An upper bound for `|f(z) - far_field|` over `|z| ≥ r`.
    fn sup_abs_beyond(&self, _r: f64) -> f64 {
        self.sup_abs() + self.far_field().abs()
    }

    /// Length scale of the features of `f`, which are assumed to sit near the origin.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// Wavelength of persistent oscillations, if `f` has any.
    fn oscillation_length(&self) -> Option<f64> {
        None
    }

    /// True when `f(x)` depends on `|x|` only.
    fn is_radial(&self) -> bool {
        false
    }

    /// Value at radius `r` for radial functions. Only called when [`is_radial`] holds.
    ///
    /// [`is_radial`]: SpatialFunction::is_radial
    fn eval_radius(&self, r: f64) -> f64 {
        let mut x = vec![0.0; self.dim()];
        x[0] = r;
        self.eval(&x)
    }
}

impl SpatialFunction for RadialWeight {
    fn dim(&self) -> usize {
        RadialWeight::dim(self)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        RadialWeight::eval(self, x)
    }

    fn sup_abs(&self) -> f64 {
        1.0
    }

    fn sup_abs_beyond(&self, r: f64) -> f64 {
        RadialWeight::eval_radius(self, r.max(0.0))
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn eval_radius(&self, r: f64) -> f64 {
        RadialWeight::eval_radius(self, r)
    }
}

/// A finite combination `Σ c_j ⟨x⟩^{-r_j}`, as produced by iterated Laplacians.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketSum {
    n: usize,
    terms: Vec<(f64, f64)>,
}

impl BracketSum {
    pub fn new(n: usize, terms: Vec<(f64, f64)>) -> Self {
        Self { n, terms }
    }

    /// `(coefficient, exponent)` pairs.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radius(norm(x))
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        let b2 = 1.0 + r * r;
        self.terms.iter().map(|(c, e)| c * b2.powf(-0.5 * e)).sum()
    }
}

impl SpatialFunction for BracketSum {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        BracketSum::eval(self, x)
    }

    fn sup_abs(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    fn sup_abs_beyond(&self, r: f64) -> f64 {
        let b2 = 1.0 + r.max(0.0).powi(2);
        self.terms.iter().map(|(c, e)| c.abs() * b2.powf(-0.5 * e)).sum()
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn eval_radius(&self, r: f64) -> f64 {
        BracketSum::eval_radius(self, r)
    }
}

/// `ψ_R(x) = ψ(x / R)`.
pub struct Scaled<'a, F: ?Sized> {
    inner: &'a F,
    scale: f64,
}

impl<'a, F: SpatialFunction + ?Sized> Scaled<'a, F> {
    pub fn new(inner: &'a F, scale: f64) -> Self {
        Self { inner, scale }
    }
}

impl<F: SpatialFunction + ?Sized> SpatialFunction for Scaled<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        self.inner.eval(&y)
    }

    fn sup_abs(&self) -> f64 {
        self.inner.sup_abs()
    }

    fn far_field(&self) -> f64 {
        self.inner.far_field()
    }

    fn sup_abs_beyond(&self, r: f64) -> f64 {
        self.inner.sup_abs_beyond(r / self.scale)
    }

    fn length_scale(&self) -> f64 {
        self.inner.length_scale() * self.scale
    }

    fn oscillation_length(&self) -> Option<f64> {
        self.inner.oscillation_length().map(|l| l * self.scale)
    }

    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }

    fn eval_radius(&self, r: f64) -> f64 {
        self.inner.eval_radius(r / self.scale)
    }
}

/// A closure-backed function with caller-supplied structural hints.
pub struct FnProfile<F> {
    n: usize,
    f: F,
    sup: f64,
    far: f64,
    scale: f64,
    oscillation: Option<f64>,
    radial: bool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnProfile<F> {
    pub fn new(n: usize, sup: f64, f: F) -> Self {
        Self { n, f, sup, far: 0.0, scale: 1.0, oscillation: None, radial: false }
    }

    pub fn with_length_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_far_field(mut self, limit: f64) -> Self {
        self.far = limit;
        self
    }

    pub fn with_oscillation(mut self, wavelength: f64) -> Self {
        self.oscillation = Some(wavelength);
        self
    }

    /// Declares the closure radial. The closure is then only called on points `(r, 0, ..)`.
    pub fn radial(mut self) -> Self {
        self.radial = true;
        self
    }
}

impl<F> fmt::Debug for FnProfile<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProfile")
            .field("n", &self.n)
            .field("sup", &self.sup)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SpatialFunction for FnProfile<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn sup_abs(&self) -> f64 {
        self.sup
    }

    fn far_field(&self) -> f64 {
        self.far
    }

    fn length_scale(&self) -> f64 {
        self.scale
    }

    fn oscillation_length(&self) -> Option<f64> {
        self.oscillation
    }

    fn is_radial(&self) -> bool {
        self.radial
    }
}
