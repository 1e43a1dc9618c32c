use std::f64::consts::PI;

use crate::{Error, Result};

/// Normalisation constant of the hypersingular kernel,
/// `4^s Γ(n/2+s) / (π^{n/2} |Γ(-s)|)`.
///
/// The absolute value makes the singular-integral operator agree in sign with the
/// Fourier multiplier `|ξ|^{2s}`.
pub fn kernel_constant(n: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!("kernel constant needs s in (0,1), got {s}")));
    }
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let half_n = 0.5 * n as f64;
    let num = 4f64.powf(s) * libm::tgamma(half_n + s);
    let den = PI.powf(half_n) * libm::tgamma(-s).abs();
    Ok(num / den)
}

/// Surface area of the unit sphere `S^{n-1} ⊂ ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    let half_n = 0.5 * n as f64;
    2.0 * PI.powf(half_n) / libm::tgamma(half_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        // Γ(-1/2) = -2√π
        assert!((kernel_constant(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((kernel_constant(2, 0.5).unwrap() - 0.5 / PI).abs() < 1e-15);
    }

    #[test]
    fn positive_for_all_dimensions() {
        for n in 1..=5 {
            for s in [0.01, 0.25, 0.5, 0.75, 0.99] {
                assert!(kernel_constant(n, s).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(kernel_constant(1, 0.0).is_err());
        assert!(kernel_constant(1, 1.0).is_err());
        assert!(kernel_constant(1, -0.3).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }
}
