use serde::{Deserialize, Serialize};

use super::params::derived_params;
use crate::fractional::INTEGER_TOL;
use crate::Result;

/// Which combination of integer and fractional orders the spatial weight is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightCase {
    /// σ and δ both integers (including δ = 0).
    BothInteger,
    /// σ integer, δ ∈ (0, 1).
    IntegerSigmaSmallDelta,
    /// σ integer, δ ∈ (1, σ) not an integer.
    IntegerSigmaLargeDelta,
    /// σ fractional, δ integer (including δ = 0).
    FractionalSigmaIntegerDelta,
    /// σ fractional, δ ∈ (0, 1).
    FractionalSigmaSmallDelta,
    /// σ fractional, δ ∈ (1, σ) not an integer.
    FractionalSigmaLargeDelta,
}

/// Spatial weight `φ(x) = ⟨x⟩^{-q}` with `q = n + 2s*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialWeightChoice {
    pub q: f64,
    pub case: WeightCase,
    /// Fractional seed `s*`; `None` when both orders are integers (then `q = n + 2`).
    pub seed: Option<f64>,
}

fn split(v: f64) -> (bool, f64) {
    let r = v.round();
    if (v - r).abs() < INTEGER_TOL {
        (true, 0.0)
    } else {
        (false, v - v.floor())
    }
}

pub fn spatial_weight_for(sigma: f64, delta: f64, n: usize) -> Result<SpatialWeightChoice> {
    derived_params(sigma, delta)?;
    let (sigma_int, s_sigma) = split(sigma);
    let (delta_int, s_delta) = split(delta);
    let small_delta = delta < 1.0;
    let (case, seed) = match (sigma_int, delta_int) {
        (true, true) => (WeightCase::BothInteger, None),
        (true, false) if small_delta => (WeightCase::IntegerSigmaSmallDelta, Some(delta)),
        (true, false) => (WeightCase::IntegerSigmaLargeDelta, Some(s_delta)),
        (false, true) => (WeightCase::FractionalSigmaIntegerDelta, Some(s_sigma)),
        (false, false) if small_delta => (WeightCase::FractionalSigmaSmallDelta, Some(s_sigma.min(delta))),
        (false, false) => (WeightCase::FractionalSigmaLargeDelta, Some(s_sigma.min(s_delta))),
    };
    let q = n as f64 + 2.0 * seed.unwrap_or(1.0);
    Ok(SpatialWeightChoice { q, case, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_examples() {
        let c = spatial_weight_for(2.0, 0.5, 3).unwrap();
        assert_eq!((c.q, c.case), (4.0, WeightCase::IntegerSigmaSmallDelta));
        let c = spatial_weight_for(3.0, 2.5, 4).unwrap();
        assert_eq!((c.q, c.seed), (5.0, Some(0.5)));
        let c = spatial_weight_for(2.5, 1.25, 3).unwrap();
        assert_eq!((c.q, c.seed, c.case), (3.5, Some(0.25), WeightCase::FractionalSigmaLargeDelta));
        let c = spatial_weight_for(1.5, 0.0, 2).unwrap();
        assert_eq!((c.q, c.case), (3.0, WeightCase::FractionalSigmaIntegerDelta));
        let c = spatial_weight_for(1.7, 0.4, 1).unwrap();
        assert!((c.q - 1.8).abs() < 1e-12);
        let c = spatial_weight_for(2.0, 1.0, 2).unwrap();
        assert_eq!((c.q, c.case, c.seed), (4.0, WeightCase::BothInteger, None));
    }

    #[test]
    fn integer_detection_tolerance() {
        let c = spatial_weight_for(2.0 + 1e-12, 0.0, 1).unwrap();
        assert_eq!(c.case, WeightCase::BothInteger);
    }

    #[test]
    fn totality_on_a_sweep() {
        for i in 0..40 {
            let sigma = 1.0 + i as f64 * 0.1;
            for j in 0..40 {
                let delta = sigma * j as f64 / 40.0;
                for n in 1..4 {
                    let c = spatial_weight_for(sigma, delta, n).unwrap();
                    assert!(c.q > n as f64 && c.q <= n as f64 + 2.0, "σ={sigma} δ={delta}");
                }
            }
        }
        assert!(spatial_weight_for(1.0, 1.0, 1).is_err());
    }
}
