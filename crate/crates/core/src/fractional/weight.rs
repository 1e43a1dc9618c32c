use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::norm;
use crate::{Error, Result};

/// Japanese bracket `⟨x⟩ = (1 + |x|²)^{1/2}`.
pub fn bracket(x: &[f64]) -> f64 {
    let r = norm(x);
    r.hypot(1.0)
}

/// The decay profile `⟨x⟩^{-q}` on `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWeight {
    n: usize,
    q: f64,
}

impl RadialWeight {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain(format!("decay exponent must be positive, got {q}")));
        }
        Ok(Self { n, q })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radius(norm(x))
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        (1.0 + r * r).powf(-0.5 * self.q)
    }
}

/// One term `coef · x^β · (1+|x|²)^{-q/2-k}` of an exact derivative of `⟨x⟩^{-q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTerm {
    pub coef: f64,
    pub powers: Vec<u32>,
    pub k: u32,
}

/// Exact term list of `∂^α ⟨x⟩^{-q}`, built one first-order derivative at a time.
pub fn derivative_terms(q: f64, alpha: &[u32]) -> Vec<DerivativeTerm> {
    let n = alpha.len();
    let mut terms: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
    terms.insert((vec![0; n], 0), 1.0);
    for (axis, &count) in alpha.iter().enumerate() {
        for _ in 0..count {
            let mut next: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
            for ((powers, k), coef) in terms {
                if powers[axis] > 0 {
                    let mut lowered = powers.clone();
                    lowered[axis] -= 1;
                    *next.entry((lowered, k)).or_insert(0.0) += coef * powers[axis] as f64;
                }
                // d/dx_i (1+|x|²)^{-e} = -2 e x_i (1+|x|²)^{-e-1}
                let e = 0.5 * q + k as f64;
                let mut raised = powers;
                raised[axis] += 1;
                *next.entry((raised, k + 1)).or_insert(0.0) += -2.0 * e * coef;
            }
            terms = next;
        }
    }
    terms.into_iter().filter(|(_, c)| *c != 0.0).map(|((powers, k), coef)| DerivativeTerm { coef, powers, k }).collect()
}

/// Exact value of `∂_x^α ⟨x⟩^{-q}` at `x`.
pub fn weight_partial_derivative(w: &RadialWeight, alpha: &[u32], x: &[f64]) -> Result<f64> {
    if alpha.len() != w.dim() || x.len() != w.dim() {
        return Err(Error::domain(format!("multi-index and point must have dimension {}", w.dim())));
    }
    let base = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
    let q = w.exponent();
    let value = derivative_terms(q, alpha)
        .iter()
        .map(|t| {
            let mono: f64 = t.powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product();
            t.coef * mono * base.powf(-0.5 * q - t.k as f64)
        })
        .sum();
    Ok(value)
}
