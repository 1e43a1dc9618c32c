use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Transition exponent `h(t) = 1/(2-2t) - 1/(2t-1)` and its first two derivatives on
/// `(1/2, 1)`. The profile is `η = 1/(1+e^h)`.
fn transition(t: f64) -> (f64, f64, f64) {
    let a = 2.0 * t - 1.0;
    let b = 2.0 - 2.0 * t;
    let h = 1.0 / b - 1.0 / a;
    let h1 = 2.0 / (a * a) + 2.0 / (b * b);
    let h2 = -8.0 / (a * a * a) + 8.0 / (b * b * b);
    (h, h1, h2)
}

/// `(η, η', η'')` of the unit cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, and the smooth
/// partition profile `e^{-1/(2-2t)} / (e^{-1/(2-2t)} + e^{-1/(2t-1)})` in between.
pub fn temporal_cutoff_eval(t: f64) -> (f64, f64, f64) {
    if t <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (h, h1, h2) = transition(t);
    let eta = (-softplus(h)).exp();
    let one_minus = (-softplus(-h)).exp();
    let w = eta * one_minus;
    (eta, -w * h1, w * ((one_minus - eta) * h1 * h1 - h2))
}

/// `ln(η^{-p'/p}|η'|^{p'})` and `ln(η^{-p'/p}|η''|^{p'})` on `(1/2, 1)`. Using
/// `η^{-p'/p} η^{p'} = η`, both reduce to `ln η + p' ln(1-η) + p' ln|·|`, which stays finite
/// where `η` itself underflows.
fn log_admissibility_terms(p: f64, t: f64) -> (f64, f64) {
    let pc = p / (p - 1.0);
    let (h, h1, h2) = transition(t);
    let log_eta = -softplus(h);
    let log_one_minus = -softplus(-h);
    let one_minus_2eta = (h / 2.0).tanh();
    let base = log_eta + pc * log_one_minus;
    let first = base + pc * h1.abs().ln();
    let second = base + pc * (one_minus_2eta * h1 * h1 - h2).abs().ln();
    (first, second)
}

/// `η^{-p'/p}(|η'|^{p'} + |η''|^{p'})` at `t`, zero outside the transition zone.
pub fn cutoff_admissibility(p: f64, t: f64) -> f64 {
    if t <= 0.5 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = log_admissibility_terms(p, t);
    a.exp() + b.exp()
}

/// Supremum of [`cutoff_admissibility`] over `samples` equispaced points of `[lo, hi]`.
pub fn admissibility_sup(p: f64, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p must exceed 1, got {p}")));
    }
    if !(0.5 <= lo && lo < hi && hi <= 1.0) || samples < 2 {
        return Err(Error::domain("sampling interval must satisfy 1/2 ≤ lo < hi ≤ 1 with ≥ 2 samples"));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    let sup = (0..samples).map(|i| cutoff_admissibility(p, lo + step * i as f64)).fold(0.0, f64::max);
    if !sup.is_finite() {
        return Err(Error::domain(format!("admissibility supremum is not finite for p = {p}")));
    }
    Ok(sup)
}

/// Rescaled cutoff `η_R(t) = η(t / R^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalCutoff {
    pub scale: f64,
    pub alpha: f64,
}

impl TemporalCutoff {
    pub fn new(scale: f64, alpha: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("cutoff needs R > 0 and α > 0, got R = {scale}, α = {alpha}")));
        }
        Ok(Self { scale, alpha })
    }

    /// `R^α`, the time at which the cutoff vanishes.
    pub fn horizon(&self) -> f64 {
        self.scale.powf(self.alpha)
    }

    /// `(η_R, η_R', η_R'')` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let tau = self.horizon();
        let (e0, e1, e2) = temporal_cutoff_eval(t / tau);
        (e0, e1 / tau, e2 / (tau * tau))
    }

    /// `η_R^{-p'/p} |η_R''|^{p'}`, the time factor in the Hölder estimate of `J₁`.
    pub fn holder_weight_second(&self, p: f64, t: f64) -> f64 {
        let tau = self.horizon();
        let s = t / tau;
        if s <= 0.5 || s >= 1.0 {
            return 0.0;
        }
        let pc = p / (p - 1.0);
        let (_, second) = log_admissibility_terms(p, s);
        (second - 2.0 * pc * tau.ln()).exp()
    }
}
