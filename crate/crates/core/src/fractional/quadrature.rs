use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::function::SpatialFunction;
use super::kernel::{kernel_constant, sphere_area};
use super::norm;
use crate::{Error, Result};

/// Node layout of the radial–angular product rule for `(-Δ)^s`.
///
/// Lengths are measured in units of `ℓ_x = max(ℓ, |x|)`, where `ℓ` is the length
/// scale reported by the integrand: the singularity-cancelled inner zone is
/// `|y| ≤ inner_radius · ℓ_x / 2` and the outer zone ends at `y_max_factor · ℓ_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub inner_radius: f64,
    /// Gauss–Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Gauss–Legendre nodes per angular panel.
    pub angular_nodes: usize,
    pub y_max_factor: f64,
    /// Beyond `Y_max`, replace `f(x ± y)` by the far-field limit and add that shell exactly.
    pub tail_correction: bool,
    /// Integrate over half the directions and double, using `y → -y` symmetry.
    pub half_domain: bool,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            inner_radius: 1.0,
            radial_nodes: 8,
            angular_nodes: 8,
            y_max_factor: 1e3,
            tail_correction: true,
            half_domain: true,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0) {
            return Err(Error::config("inner radius must be positive"));
        }
        if self.radial_nodes < 4 || self.angular_nodes < 4 {
            return Err(Error::config("node counts must be at least 4"));
        }
        if !(self.y_max_factor > 0.5 * self.inner_radius) {
            return Err(Error::config("outer truncation must exceed the inner radius"));
        }
        Ok(())
    }

    /// Doubles every node count and the truncation radius.
    pub fn refined(&self) -> Self {
        Self {
            radial_nodes: 2 * self.radial_nodes,
            angular_nodes: 2 * self.angular_nodes,
            y_max_factor: 2.0 * self.y_max_factor,
            ..*self
        }
    }
}

/// A quadrature value with its refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// `(-Δ)^s f(x) = -(C_{n,s}/2) ∫ (f(x+y) + f(x-y) - 2f(x)) / |y|^{n+2s} dy`.
///
/// Evaluated at three refinement levels; the value is the finest one and the error
/// estimate is twice the change between the two finest levels plus the unresolved tail bound.
/// A change that grows under refinement is reported as a quadrature failure.
pub fn fractional_laplacian_quadrature<F: SpatialFunction + ?Sized>(
    f: &F,
    s: f64,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<QuadResult> {
    let n = f.dim();
    if x.len() != n {
        return Err(Error::domain(format!("point has dimension {}, expected {n}", x.len())));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("quadrature supports n = 1, 2, 3, got {n}")));
    }
    let c = kernel_constant(n, s)?;
    scheme.validate()?;

    let radius = norm(x);
    let coarse = integrate_level(f, s, x, scheme);
    let mid_scheme = scheme.refined();
    let mid = integrate_level(f, s, x, &mid_scheme);
    let fine = integrate_level(f, s, x, &mid_scheme.refined());

    let scale = 0.5 * c;
    let value = -scale * fine.integral;
    let e_coarse = scale * (mid.integral - coarse.integral).abs();
    let e_fine = scale * (fine.integral - mid.integral).abs();
    let roundoff = 1e-10 * scale * fine.abs_mass;
    if !value.is_finite() || !e_fine.is_finite() {
        return Err(Error::Quadrature { radius, detail: "non-finite integral".into() });
    }
    if e_fine > 2.0 * e_coarse && e_fine > roundoff {
        return Err(Error::Quadrature {
            radius,
            detail: format!("refinement diverging: {e_coarse:.3e} -> {e_fine:.3e}"),
        });
    }
    // safety factor 2: once the levels reach the rounding floor of the cancellation
    // f(x+y) + f(x-y) - 2f(x), successive changes stop shrinking
    let float_floor = 1e3 * f64::EPSILON * scale * fine.abs_mass;
    Ok(QuadResult { value, error_estimate: 2.0 * e_fine + scale * fine.tail_bound + float_floor })
}

/// Relative radius (in units of `max(ℓ, |x|)`) below which the Taylor model is used.
const TAYLOR_RADIUS: f64 = 1e-3;

struct LevelResult {
    integral: f64,
    abs_mass: f64,
    tail_bound: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if k == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[k - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    (nodes, weights)
}

/// Appends Gauss–Legendre nodes mapped to `[a, b]`.
fn push_panel(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (t, w) in rule.0.iter().zip(&rule.1) {
        out.push((mid + half * t, half * w));
    }
}

/// Angular nodes in `[0, π/2]`, graded geometrically toward `0`.
fn graded_angles(theta_min: f64, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let top = 0.5 * PI;
    let mut out = Vec::new();
    let mut a = 0.0;
    let mut b = theta_min.min(top);
    loop {
        push_panel(rule, a, b, &mut out);
        if b >= top {
            break;
        }
        a = b;
        b = (2.0 * b).min(top);
    }
    out
}

/// Orthonormal frame whose first vector points along `x` (or the first axis at the origin).
fn frame(x: &[f64]) -> [[f64; 3]; 3] {
    let mut e = [0.0; 3];
    let r = norm(x);
    if r > 0.0 {
        for (ei, xi) in e.iter_mut().zip(x) {
            *ei = xi / r;
        }
    } else {
        e[0] = 1.0;
    }
    match x.len() {
        1 => [e, [0.0; 3], [0.0; 3]],
        2 => [e, [-e[1], e[0], 0.0], [0.0; 3]],
        _ => {
            // Gram–Schmidt against the coordinate axis least aligned with e
            let axis = (0..3).min_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs())).unwrap_or(0);
            let mut u = [0.0; 3];
            u[axis] = 1.0;
            let d: f64 = (0..3).map(|i| u[i] * e[i]).sum();
            for i in 0..3 {
                u[i] -= d * e[i];
            }
            let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in u.iter_mut() {
                *v /= un;
            }
            let w = [e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]];
            [e, u, w]
        }
    }
}

struct Sampler<'a, F: ?Sized> {
    f: &'a F,
    x: [f64; 3],
    n: usize,
    radius: f64,
    fx: f64,
    frame: [[f64; 3]; 3],
    /// Below this radius the second difference is replaced by its quadratic Taylor model.
    rho_taylor: f64,
}

impl<F: SpatialFunction + ?Sized> Sampler<'_, F> {
    /// Second difference `f(x+y) + f(x-y) - 2f(x)` for `y = ρ ω`, with `ω` given by
    /// its coordinates `(c0, c1, c2)` in the local frame.
    fn second_difference(&self, rho: f64, c: [f64; 3]) -> f64 {
        if rho < self.rho_taylor {
            // cancellation in f(x+y)+f(x-y)-2f(x) would dominate; the second difference is
            // even in ρ, so fit F(ρ) = a ρ² + b ρ⁴ through ρ_c and 2ρ_c
            let f1 = self.raw_difference(self.rho_taylor, c);
            let f2 = self.raw_difference(2.0 * self.rho_taylor, c);
            let t = (rho / self.rho_taylor).powi(2);
            let a = (16.0 * f1 - f2) / 12.0;
            let b = (f2 - 4.0 * f1) / 12.0;
            return t * (a + b * t);
        }
        self.raw_difference(rho, c)
    }

    fn raw_difference(&self, rho: f64, c: [f64; 3]) -> f64 {
        if self.f.is_radial() {
            // |x ± y|² = |x|² + ρ² ± 2|x|ρ c0
            let base = self.radius * self.radius + rho * rho;
            let cross = 2.0 * self.radius * rho * c[0];
            let plus = (base + cross).max(0.0).sqrt();
            let minus = (base - cross).max(0.0).sqrt();
            return self.f.eval_radius(plus) + self.f.eval_radius(minus) - 2.0 * self.fx;
        }
        let mut yp = [0.0; 3];
        let mut ym = [0.0; 3];
        for i in 0..self.n {
            let yi = rho * (c[0] * self.frame[0][i] + c[1] * self.frame[1][i] + c[2] * self.frame[2][i]);
            yp[i] = self.x[i] + yi;
            ym[i] = self.x[i] - yi;
        }
        self.f.eval(&yp[..self.n]) + self.f.eval(&ym[..self.n]) - 2.0 * self.fx
    }
}

fn integrate_level<F: SpatialFunction + ?Sized>(f: &F, s: f64, x: &[f64], scheme: &QuadratureScheme) -> LevelResult {
    let n = f.dim();
    let radius = norm(x);
    let ell = f.length_scale();
    let big = ell.max(radius);
    let r_in = 0.5 * scheme.inner_radius * big;
    let y_max = scheme.y_max_factor * big;

    let mut xs = [0.0; 3];
    xs[..n].copy_from_slice(x);
    let sampler = Sampler { f, x: xs, n, radius, fx: f.eval(x), frame: frame(x), rho_taylor: TAYLOR_RADIUS * big };
    let radial_rule = gauss_legendre(scheme.radial_nodes);
    let angular_rule = gauss_legendre(scheme.angular_nodes);

    // (radius, weight) pairs, weights already include the inner-zone Jacobian
    let mut radial = Vec::new();
    let grading = 2.0 / (2.0 - 2.0 * s);
    let mut tau_nodes = Vec::new();
    let levels = 8;
    push_panel(&radial_rule, 0.0, 0.5f64.powi(levels), &mut tau_nodes);
    for k in (0..levels).rev() {
        push_panel(&radial_rule, 0.5f64.powi(k + 1), 0.5f64.powi(k), &mut tau_nodes);
    }
    for (tau, w) in tau_nodes {
        let rho = r_in * tau.powf(grading);
        radial.push((rho, w * r_in * grading * tau.powf(grading - 1.0)));
    }
    for (a, b) in outer_panels(r_in, y_max, radius, ell, f.oscillation_length()) {
        push_panel(&radial_rule, a, b, &mut radial);
    }

    let mut integral = 0.0;
    let mut abs_mass = 0.0;
    for (rho, w) in radial {
        let (avg, avg_abs) = angular_integral(&sampler, rho, ell, scheme, &angular_rule);
        let kernel = rho.powf(-1.0 - 2.0 * s);
        integral += w * avg * kernel;
        abs_mass += w * avg_abs * kernel;
    }

    let shell = sphere_area(n) * y_max.powf(-2.0 * s) / (2.0 * s);
    let tail_bound = if scheme.tail_correction {
        integral += 2.0 * (f.far_field() - sampler.fx) * shell;
        2.0 * f.sup_abs_beyond(y_max - radius) * shell
    } else {
        4.0 * f.sup_abs() * shell
    };
    LevelResult { integral, abs_mass, tail_bound }
}

/// Panels covering `[r_in, y_max]`: geometric in `|y|`, refined geometrically toward
/// `|y| = |x|` where `f(x - y)` passes over the origin, and capped by the oscillation length.
fn outer_panels(r_in: f64, y_max: f64, radius: f64, ell: f64, oscillation: Option<f64>) -> Vec<(f64, f64)> {
    let mut cuts = vec![r_in, y_max];
    let mut r = 2.0 * r_in;
    while r < y_max {
        cuts.push(r);
        r *= 2.0;
    }
    if radius > r_in {
        cuts.push(radius);
        let mut d = 0.25 * ell;
        while d < y_max {
            for c in [radius - d, radius + d] {
                if c > r_in && c < y_max {
                    cuts.push(c);
                }
            }
            d *= 2.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());

    let mut panels = Vec::with_capacity(cuts.len());
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = match oscillation {
            Some(len) if len > 0.0 => ((b - a) / len).ceil().max(1.0) as usize,
            _ => 1,
        };
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            panels.push((a + i as f64 * h, if i + 1 == pieces { b } else { a + (i + 1) as f64 * h }));
        }
    }
    panels
}

/// Integral of the second difference over the sphere `|y| = ρ` (surface measure of the
/// unit sphere), together with the integral of its absolute value.
fn angular_integral<F: SpatialFunction + ?Sized>(
    sm: &Sampler<'_, F>,
    rho: f64,
    ell: f64,
    scheme: &QuadratureScheme,
    rule: &(Vec<f64>, Vec<f64>),
) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sum_abs = 0.0;
    let mut add = |v: f64, w: f64| {
        sum += w * v;
        sum_abs += w * v.abs();
    };
    // Rules integrate over the half sphere {ω · e ≥ 0} (n = 3) or the half circle
    // θ ∈ [-π/2, π/2] (n = 2); the full domain adds the mirrored nodes -ω.
    let mirror = !scheme.half_domain;
    let factor = if scheme.half_domain { 2.0 } else { 1.0 };
    let near_origin = sm.radius < ell;
    let theta_min = 0.25 * ell.max((rho - sm.radius).abs()) / rho.max(ell);

    match sm.n {
        1 => {
            add(factor * sm.second_difference(rho, [1.0, 0.0, 0.0]), 1.0);
            if mirror {
                add(sm.second_difference(rho, [-1.0, 0.0, 0.0]), 1.0);
            }
        }
        2 => {
            let nodes: Vec<(f64, f64)> = if near_origin {
                let m = 2 * scheme.angular_nodes;
                let h = PI / m as f64;
                (0..m).map(|j| (-0.5 * PI + j as f64 * h, h)).collect()
            } else {
                graded_angles(theta_min, rule).into_iter().flat_map(|(t, w)| [(t, w), (-t, w)]).collect()
            };
            for (t, w) in nodes {
                let c = [t.cos(), t.sin(), 0.0];
                add(factor * sm.second_difference(rho, c), w);
                if mirror {
                    add(sm.second_difference(rho, [-c[0], -c[1], 0.0]), w);
                }
            }
        }
        _ => {
            let polar: Vec<(f64, f64)> = if near_origin {
                let mut v = Vec::new();
                push_panel(rule, 0.0, 0.5 * PI, &mut v);
                v
            } else {
                graded_angles(theta_min, rule)
            };
            let azimuth: Vec<(f64, f64)> = if sm.f.is_radial() {
                vec![(0.0, 2.0 * PI)]
            } else {
                let m = 2 * scheme.angular_nodes;
                let h = 2.0 * PI / m as f64;
                (0..m).map(|j| (j as f64 * h, h)).collect()
            };
            for (t, wt) in polar {
                let (st, ct) = t.sin_cos();
                for &(phi, wp) in &azimuth {
                    let (sp, cp) = phi.sin_cos();
                    let c = [ct, st * cp, st * sp];
                    let w = wt * st * wp;
                    add(factor * sm.second_difference(rho, c), w);
                    if mirror {
                        add(sm.second_difference(rho, [-c[0], -c[1], -c[2]]), w);
                    }
                }
            }
        }
    }
    (sum, sum_abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::{FnProfile, RadialWeight};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(6);
        // exact up to degree 11
        let integral: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-14);
        assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constants_are_annihilated() {
        let scheme = QuadratureScheme::default();
        for n in 1..=3 {
            let f = FnProfile::new(n, 3.0, |_: &[f64]| 3.0).with_far_field(3.0);
            let mut x = vec![0.0; n];
            x[0] = 0.7;
            let r = fractional_laplacian_quadrature(&f, 0.4, &x, &scheme).unwrap();
            assert!(r.value.abs() < 1e-12, "n={n}: {}", r.value);
        }
    }

    #[test]
    fn harmonic_extension_oracle_at_origin() {
        // (-Δ)^{1/2} (1+x²)^{-1} = (1-x²)/(1+x²)²
        let w = RadialWeight::new(1, 2.0).unwrap();
        let r = fractional_laplacian_quadrature(&w, 0.5, &[0.0], &QuadratureScheme::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.error_estimate < 1e-4);
    }

    #[test]
    fn rejects_bad_order_and_dimension() {
        let w = RadialWeight::new(1, 2.0).unwrap();
        let scheme = QuadratureScheme::default();
        assert!(fractional_laplacian_quadrature(&w, 1.0, &[0.0], &scheme).is_err());
        assert!(fractional_laplacian_quadrature(&w, 0.5, &[0.0, 0.0], &scheme).is_err());
        let bad = QuadratureScheme { radial_nodes: 2, ..scheme };
        assert!(fractional_laplacian_quadrature(&w, 0.5, &[0.0], &bad).is_err());
    }

    #[test]
    fn outer_panels_cover_interval() {
        let p = outer_panels(0.5, 1000.0, 30.0, 1.0, None);
        assert_eq!(p.first().unwrap().0, 0.5);
        assert_eq!(p.last().unwrap().1, 1000.0);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
            assert!(w[0].1 > w[0].0);
        }
    }
}
