use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fractional::TorusGrid;
use crate::testfn::ModelParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// Half side `L` of the periodic box `[-L, L)ⁿ`.
    pub half_extent: f64,
    /// Points per axis, a power of two.
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<TorusGrid>> {
        Ok(Arc::new(TorusGrid::new(self.n, self.half_extent, self.points)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    /// Largest (and initial) time step.
    pub dt: f64,
    pub dt_min: f64,
    /// Blow-up threshold `M` on `‖u‖_∞`.
    pub threshold: f64,
    pub t_end: f64,
    /// Nonlinear step cap: `dt ≤ cfl · ‖u‖_∞^{-(p-1)/2}`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Spacing of the recorded norm samples; steps are shortened to land on them.
    #[serde(default = "default_record")]
    pub record_interval: f64,
    /// Spacing of captured solution frames, if any.
    #[serde(default)]
    pub capture_interval: Option<f64>,
    /// Switch for the `|u|^p` source; off gives the linear flow.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_cfl() -> f64 {
    0.1
}

fn default_record() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_max_steps() -> u64 {
    50_000_000
}

impl SimConfig {
    pub fn new(params: ModelParams, grid: GridSpec, dt: f64, t_end: f64) -> Self {
        Self {
            params,
            grid,
            dt,
            dt_min: dt * 1e-9,
            threshold: 1e4,
            t_end,
            cfl: default_cfl(),
            record_interval: default_record(),
            capture_interval: None,
            nonlinear: true,
            max_steps: default_max_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(1..=3).contains(&self.grid.n) || self.grid.n != self.params.n {
            return Err(Error::config(format!(
                "grid dimension {} must match the model dimension {} and lie in 1..=3",
                self.grid.n, self.params.n
            )));
        }
        if !self.grid.points.is_power_of_two() {
            return Err(Error::config("points per axis must be a power of two"));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dt) || !positive(self.dt_min) || self.dt_min >= self.dt {
            return Err(Error::config(format!("need 0 < dt_min < dt, got dt_min = {}, dt = {}", self.dt_min, self.dt)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::config("blow-up threshold must be positive"));
        }
        if !positive(self.t_end) || !positive(self.cfl) || !positive(self.record_interval) {
            return Err(Error::config("t_end, cfl and record_interval must be positive and finite"));
        }
        if let Some(c) = self.capture_interval {
            if !positive(c) {
                return Err(Error::config("capture interval must be positive"));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        sha256_hex(json.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
