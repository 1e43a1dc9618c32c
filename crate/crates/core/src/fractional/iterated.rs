use super::function::BracketSum;
use super::weight::{bracket, RadialWeight};
use crate::{Error, Result};

/// `-Δ ⟨x⟩^{-r} = r((n-r-2)⟨x⟩^{-r-2} + (r+2)⟨x⟩^{-r-4})` evaluated at `x ∈ ℝⁿ`.
pub fn laplacian_weight_step(r: f64, x: &[f64]) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("bracket exponent must be positive, got {r}")));
    }
    let n = x.len() as f64;
    let b = bracket(x);
    Ok(r * ((n - r - 2.0) * b.powf(-r - 2.0) + (r + 2.0) * b.powf(-r - 4.0)))
}

/// `(-Δ)^m ⟨x⟩^{-q}` as an exact finite sum `Σ_k c_k ⟨x⟩^{-q-2m-2k}`, `k = 0..=m`.
///
/// Each pass maps `c ⟨x⟩^{-r}` to the two terms of [`laplacian_weight_step`].
pub fn iterated_laplacian(w: &RadialWeight, m: u32) -> BracketSum {
    let n = w.dim() as f64;
    let q = w.exponent();
    // coeffs[j] multiplies ⟨x⟩^{-q-2j}
    let mut coeffs = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; coeffs.len() + 2];
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let r = q + 2.0 * j as f64;
            next[j + 1] += c * r * (n - r - 2.0);
            next[j + 2] += c * r * (r + 2.0);
        }
        coeffs = next;
    }
    let terms = coeffs.into_iter().enumerate().skip(m as usize).map(|(j, c)| (c, q + 2.0 * j as f64)).collect();
    BracketSum::new(w.dim(), terms)
}

/// The printed m-step representation with binomial middle coefficients:
///
/// `(-1)^m Π_{j<m}(q+2j) Σ_k (-1)^k C(m,k) Π_{j=k+1}^{m}(-n+q+2j) Π_{i<k}(q+2m+2i) ⟨x⟩^{-q-2m-2k}`.
///
/// Kept separately so it can be checked against the recursion in [`iterated_laplacian`].
pub fn printed_closed_form(w: &RadialWeight, m: u32) -> BracketSum {
    let n = w.dim() as f64;
    let q = w.exponent();
    let sign_m = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lead: f64 = (0..m).map(|j| q + 2.0 * j as f64).product();
    let terms = (0..=m)
        .map(|k| {
            let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
            let tail: f64 = (k + 1..=m).map(|j| -n + q + 2.0 * j as f64).product();
            let head: f64 = (0..k).map(|i| q + 2.0 * m as f64 + 2.0 * i as f64).product();
            let coef = sign_m * lead * sign_k * binomial(m, k) * tail * head;
            (coef, q + 2.0 * (m + k) as f64)
        })
        .collect();
    BracketSum::new(w.dim(), terms)
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_examples() {
        assert!((laplacian_weight_step(1.0, &[0.0, 0.0, 0.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!((laplacian_weight_step(2.0, &[0.0, 0.0]).unwrap() - 4.0).abs() < 1e-15);
        assert!(laplacian_weight_step(0.0, &[0.0]).is_err());
    }

    #[test]
    fn one_step_decays() {
        let far = laplacian_weight_step(1.5, &[1e4, 0.0]).unwrap();
        let b: f64 = bracket(&[1e4, 0.0]);
        // leading order ⟨x⟩^{-r-2} with coefficient r(n-r-2)
        assert!((far / b.powf(-3.5) - 1.5 * (2.0 - 3.5)).abs() < 1e-6);
    }

    #[test]
    fn base_case_matches_step() {
        let w = RadialWeight::new(3, 1.7).unwrap();
        let sum = iterated_laplacian(&w, 1);
        for x in [[0.0, 0.0, 0.0], [0.4, 1.0, -2.0], [10.0, 0.0, 3.0]] {
            let a = sum.eval(&x);
            let b = laplacian_weight_step(1.7, &x).unwrap();
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn term_count_and_exponents() {
        let w = RadialWeight::new(2, 0.5).unwrap();
        let sum = iterated_laplacian(&w, 3);
        let exps: Vec<f64> = sum.terms().iter().map(|t| t.1).collect();
        assert_eq!(exps, vec![6.5, 8.5, 10.5, 12.5]);
    }

    #[test]
    fn leading_coefficient_product() {
        let (n, q, m) = (5usize, 1.0, 3u32);
        let w = RadialWeight::new(n, q).unwrap();
        let lead = iterated_laplacian(&w, m).terms()[0].0;
        let a: f64 = (0..m).map(|j| q + 2.0 * j as f64).product();
        let b: f64 = (1..=m).map(|j| -(n as f64) + q + 2.0 * j as f64).product();
        // Π(n-q-2j) = (-1)^m Π(-n+q+2j)
        assert!((lead - a * b * if m % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-12);
    }
}
