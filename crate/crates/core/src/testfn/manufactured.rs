use std::sync::Arc;

use super::functionals::WeakFormData;
use super::params::ModelParams;
use crate::fractional::{GridField, TorusGrid};
use crate::sim::Trajectory;
use crate::{Error, Result};

/// A separable field `u(t, x) = a(t) g(x)` with the source
/// `a'' g + a (-Δ)^σ g + a' (-Δ)^δ g` that makes it an exact solution on the torus.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub trajectory: Trajectory,
    pub source: Vec<Vec<f64>>,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

impl ManufacturedSolution {
    /// Samples every `dt` on `[0, t_end]` (the last frame at or after `t_end`). `a` returns
    /// `(a, a', a'')`. The operators are applied spectrally with `(-Δ)^0 = I`.
    pub fn separable(
        grid: Arc<TorusGrid>,
        params: &ModelParams,
        profile: &[f64],
        a: impl Fn(f64) -> (f64, f64, f64),
        dt: f64,
        t_end: f64,
    ) -> Result<Self> {
        if profile.len() != grid.len() {
            return Err(Error::config(format!("profile must have {} samples", grid.len())));
        }
        if !(dt > 0.0 && t_end > 0.0) {
            return Err(Error::config("dt and t_end must be positive"));
        }
        let field = GridField::new(grid.clone(), profile.to_vec())?;
        let lap = |gamma: f64| -> Vec<f64> {
            let symbol = |k2: f64| match (gamma == 0.0, k2 == 0.0) {
                (true, _) => 1.0,
                (false, true) => 0.0,
                (false, false) => k2.powf(gamma),
            };
            field.apply_multiplier(symbol).values().to_vec()
        };
        let ls = lap(params.sigma);
        let ld = lap(params.delta);
        let steps = (t_end / dt - 1e-9).ceil() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let mut frames = Vec::with_capacity(times.len());
        let mut source = Vec::with_capacity(times.len());
        for &t in &times {
            let (a0, a1, a2) = a(t);
            frames.push(profile.iter().map(|g| a0 * g).collect());
            source.push((0..profile.len()).map(|i| a2 * profile[i] + a0 * ls[i] + a1 * ld[i]).collect());
        }
        let (a0, a1, _) = a(0.0);
        Ok(Self {
            trajectory: Trajectory { grid, times, frames },
            source,
            u0: profile.iter().map(|g| a0 * g).collect(),
            u1: profile.iter().map(|g| a1 * g).collect(),
        })
    }

    pub fn weak_form(&self) -> WeakFormData<'_> {
        WeakFormData { trajectory: &self.trajectory, u0: &self.u0, u1: &self.u1, source: Some(&self.source) }
    }
}
