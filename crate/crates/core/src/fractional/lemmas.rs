use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::{Scaled, SpatialFunction};
use super::iterated::iterated_laplacian;
use super::order::FractionalOrder;
use super::quadrature::{fractional_laplacian_quadrature, QuadResult, QuadratureScheme};
use super::weight::{bracket, RadialWeight};
use super::INTEGER_TOL;
use crate::fit::loglog_slope;
use crate::{Error, Result};

/// `(-Δ)^γ ⟨x⟩^{-q}` computed as `(-Δ)^s` applied to the exact sum `(-Δ)^m ⟨x⟩^{-q}`.
pub fn fractional_laplacian_of_weight(
    w: &RadialWeight,
    order: FractionalOrder,
    x: &[f64],
    scheme: &QuadratureScheme,
) -> Result<QuadResult> {
    let m = order.integer_part();
    let s = order.fractional_part();
    if s == 0.0 {
        let value = if m == 0 { w.eval(x) } else { iterated_laplacian(w, m).eval(x) };
        return Ok(QuadResult { value, error_estimate: 0.0 });
    }
    if m == 0 {
        fractional_laplacian_quadrature(w, s, x, scheme)
    } else {
        fractional_laplacian_quadrature(&iterated_laplacian(w, m), s, x, scheme)
    }
}

/// Which branch of the decay estimate applies, decided by the sign of `q + 2m - n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayCase {
    Subcritical,
    Critical,
    Supercritical,
}

impl DecayCase {
    pub fn select(q: f64, m: u32, n: usize) -> Self {
        let gap = q + 2.0 * m as f64 - n as f64;
        if gap.abs() < INTEGER_TOL {
            DecayCase::Critical
        } else if gap < 0.0 {
            DecayCase::Subcritical
        } else {
            DecayCase::Supercritical
        }
    }
}

/// Majorant of `|(-Δ)^γ ⟨x⟩^{-q}|`:
/// `⟨x⟩^{-q-2γ}` if `q+2m < n`, `⟨x⟩^{-n-2s} log(e+|x|)` if `q+2m = n`, `⟨x⟩^{-n-2s}` otherwise.
pub fn decay_majorant(q: f64, order: FractionalOrder, n: usize, x: &[f64]) -> f64 {
    let b = bracket(x);
    let s = order.fractional_part();
    let nf = n as f64;
    match DecayCase::select(q, order.integer_part(), n) {
        DecayCase::Subcritical => b.powf(-q - 2.0 * order.gamma()),
        DecayCase::Critical => {
            let r = super::norm(x);
            b.powf(-nf - 2.0 * s) * (std::f64::consts::E + r).ln()
        }
        DecayCase::Supercritical => b.powf(-nf - 2.0 * s),
    }
}

/// Whether `|(-Δ)^γ ⟨x⟩^{-q}|` decays exactly like the majorant.
///
/// The majorant is not attained when
/// - `m ≥ 1` outside the subcritical case, where `(-Δ)^m ⟨x⟩^{-q}` has zero integral;
/// - the leading coefficient `Π_{j<m} (n - q - 2j - 2)` of `(-Δ)^m |x|^{-q}` vanishes;
/// - `q + 2m = n - 2s - 2k` for an integer `k ≥ 0`, where the leading coefficient of the
///   Riesz-type asymptotics has a `1/Γ` zero. This includes `⟨x⟩^{-(n-2s)}`, whose image
///   is exactly `c⟨x⟩^{-n-2s}`.
pub fn majorant_is_sharp(q: f64, order: FractionalOrder, n: usize) -> bool {
    let m = order.integer_part();
    let s = order.fractional_part();
    let nf = n as f64;
    match DecayCase::select(q, m, n) {
        DecayCase::Critical | DecayCase::Supercritical => m == 0,
        DecayCase::Subcritical => {
            if (0..m).any(|j| (nf - q - 2.0 * j as f64 - 2.0).abs() < INTEGER_TOL) {
                return false;
            }
            if s == 0.0 {
                return true;
            }
            let z = 0.5 * (nf - q - 2.0 * m as f64 - 2.0 * s);
            !(z < INTEGER_TOL && (z - z.round()).abs() < INTEGER_TOL)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub radius: f64,
    pub value: Option<f64>,
    pub error_estimate: Option<f64>,
    pub majorant: f64,
    pub ratio: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub q: f64,
    pub gamma: f64,
    pub n: usize,
    pub case: DecayCase,
    pub samples: Vec<DecaySample>,
    /// Largest `|value| / majorant` over successful samples.
    pub max_ratio: f64,
    /// Log-log slope of `|value|` against `|x|`.
    pub fitted_slope: Option<f64>,
    /// Log-log slope of the majorant over the same radii.
    pub majorant_slope: Option<f64>,
}

impl DecayReport {
    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.failure.is_some()).count()
    }

    pub fn slope_gap(&self) -> Option<f64> {
        Some((self.fitted_slope? - self.majorant_slope?).abs())
    }
}

/// Evaluates `(-Δ)^γ ⟨x⟩^{-q}` along the first axis at each radius and compares with the
/// case-selected majorant. Quadrature failures are recorded per radius.
pub fn verify_decay_lemma(
    q: f64,
    order: FractionalOrder,
    n: usize,
    radii: &[f64],
    scheme: &QuadratureScheme,
) -> Result<DecayReport> {
    let w = RadialWeight::new(n, q)?;
    let (lo, hi) = radii.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if radii.is_empty() || !(lo > 0.0) || hi / lo < 100.0 {
        return Err(Error::domain("radii must be positive and span at least two decades"));
    }
    let samples: Vec<DecaySample> = radii
        .par_iter()
        .map(|&radius| {
            let mut x = vec![0.0; n];
            x[0] = radius;
            let majorant = decay_majorant(q, order, n, &x);
            match fractional_laplacian_of_weight(&w, order, &x, scheme) {
                Ok(r) => DecaySample {
                    radius,
                    value: Some(r.value),
                    error_estimate: Some(r.error_estimate),
                    majorant,
                    ratio: Some(r.value.abs() / majorant),
                    failure: None,
                },
                Err(e) => DecaySample {
                    radius,
                    value: None,
                    error_estimate: None,
                    majorant,
                    ratio: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();

    let ok: Vec<&DecaySample> = samples.iter().filter(|s| s.value.is_some()).collect();
    let rs: Vec<f64> = ok.iter().map(|s| s.radius).collect();
    let vs: Vec<f64> = ok.iter().filter_map(|s| s.value).collect();
    let ms: Vec<f64> = ok.iter().map(|s| s.majorant).collect();
    let max_ratio = ok.iter().filter_map(|s| s.ratio).fold(0.0, f64::max);
    Ok(DecayReport {
        q,
        gamma: order.gamma(),
        n,
        case: DecayCase::select(q, order.integer_part(), n),
        fitted_slope: loglog_slope(&rs, &vs),
        majorant_slope: loglog_slope(&rs, &ms),
        max_ratio,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub x: Vec<f64>,
    /// `(-Δ)^s(ψ_R)(x)`
    pub lhs: f64,
    /// `R^{-2s} ((-Δ)^s ψ)(x/R)`
    pub rhs: f64,
    pub discrepancy: f64,
    pub combined_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub s: f64,
    pub scale: f64,
    pub samples: Vec<ScalingSample>,
    pub max_discrepancy: f64,
}

impl ScalingReport {
    /// True when every discrepancy is within `factor` times the combined error estimate
    /// (plus a few ulps of the compared values).
    pub fn within(&self, factor: f64) -> bool {
        self.samples.iter().all(|s| {
            let ulps = 64.0 * f64::EPSILON * s.lhs.abs().max(s.rhs.abs());
            s.discrepancy <= factor * s.combined_error + ulps
        })
    }
}

/// Compares quadrature of `ψ(·/R)` at `x` with `R^{-2s}` times quadrature of `ψ` at `x/R`.
pub fn verify_scaling<F: SpatialFunction + ?Sized>(
    psi: &F,
    s: f64,
    scale: f64,
    points: &[Vec<f64>],
    scheme: &QuadratureScheme,
) -> Result<ScalingReport> {
    if !(scale > 0.0) {
        return Err(Error::domain(format!("scale must be positive, got {scale}")));
    }
    let scaled = Scaled::new(psi, scale);
    let factor = scale.powf(-2.0 * s);
    let samples = points
        .par_iter()
        .map(|x| {
            let lhs = fractional_laplacian_quadrature(&scaled, s, x, scheme)?;
            let y: Vec<f64> = x.iter().map(|v| v / scale).collect();
            let base = fractional_laplacian_quadrature(psi, s, &y, scheme)?;
            let rhs = factor * base.value;
            Ok(ScalingSample {
                x: x.clone(),
                lhs: lhs.value,
                rhs,
                discrepancy: (lhs.value - rhs).abs(),
                combined_error: lhs.error_estimate + factor * base.error_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = samples.iter().map(|s| s.discrepancy).fold(0.0, f64::max);
    Ok(ScalingReport { s, scale, samples, max_discrepancy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majorant_at_origin() {
        let x = [0.0, 0.0, 0.0];
        let sub = FractionalOrder::new(0.5).unwrap();
        assert_eq!(decay_majorant(1.0, sub, 3, &x), 1.0);
        // q + 2m = n: log(e) = 1
        let crit = FractionalOrder::new(1.25).unwrap();
        assert!((decay_majorant(1.0, crit, 3, &x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn majorant_supercritical_value() {
        let order = FractionalOrder::new(0.5).unwrap();
        let v = decay_majorant(2.0, order, 1, &[3.0]);
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn case_selection() {
        assert_eq!(DecayCase::select(1.0, 0, 3), DecayCase::Subcritical);
        assert_eq!(DecayCase::select(1.0, 1, 3), DecayCase::Critical);
        assert_eq!(DecayCase::select(1.0 + 1e-12, 1, 3), DecayCase::Critical);
        assert_eq!(DecayCase::select(4.0, 0, 3), DecayCase::Supercritical);
    }

    #[test]
    fn integer_order_reduces_to_recursion() {
        let w = RadialWeight::new(3, 1.0).unwrap();
        let order = FractionalOrder::new(1.0).unwrap();
        let r = fractional_laplacian_of_weight(&w, order, &[0.0, 0.0, 0.0], &Default::default()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-15);
        assert_eq!(r.error_estimate, 0.0);
    }

    #[test]
    fn sharpness_classification() {
        let o = |g: f64| FractionalOrder::new(g).unwrap();
        assert!(majorant_is_sharp(0.5, o(1.5), 3));
        assert!(majorant_is_sharp(3.0, o(0.75), 3));
        assert!(majorant_is_sharp(4.0, o(0.75), 3));
        assert!(!majorant_is_sharp(3.5, o(1.5), 3));
        assert!(!majorant_is_sharp(2.0, o(0.5), 3));
        assert!(!majorant_is_sharp(0.5, o(0.25), 1));
        assert!(!majorant_is_sharp(1.0, o(1.25), 3));
        assert!(!majorant_is_sharp(2.0, o(1.25), 4));
        assert!(majorant_is_sharp(1.0, o(1.25), 4));
    }

    #[test]
    fn decay_needs_two_decades() {
        let order = FractionalOrder::new(0.5).unwrap();
        let err = verify_decay_lemma(2.0, order, 1, &[1.0, 10.0], &Default::default());
        assert!(err.is_err());
    }
}
