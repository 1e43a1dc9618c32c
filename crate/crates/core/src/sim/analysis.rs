use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::integrator::NormSample;
use super::run::{run_on_grid, Verdict};
use crate::fit::linear_fit;
use crate::fractional::TorusGrid;
use crate::{Error, Result};

/// `amplitude · exp(-|x|²/(2w²))` sampled on the grid.
pub fn gaussian_bump(grid: &TorusGrid, amplitude: f64, width: f64) -> Vec<f64> {
    let n = grid.dim();
    grid.coordinates()
        .map(|x| {
            let r2: f64 = x[..n].iter().map(|v| v * v).sum();
            amplitude * (-r2 / (2.0 * width * width)).exp()
        })
        .collect()
}

/// Time after which the periodic images start to matter: a quarter of the e-folding time
/// of the slowest decaying nonzero mode `|ξ| = π/L`.
pub fn wrap_time(cfg: &SimConfig) -> f64 {
    let xi = PI / cfg.grid.half_extent;
    let a = xi.powf(2.0 * cfg.params.delta);
    let b = xi.powf(2.0 * cfg.params.sigma);
    let mu = 0.5 * a;
    let rate = if mu * mu >= b { b / (mu + (mu * mu - b).sqrt()) } else { mu };
    0.25 / rate
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearDecayFit {
    /// Fitted exponents of `‖u‖`, `‖|D|^{k⁺}u‖` and `‖u_t‖` against `1 + t`.
    pub solution: f64,
    pub derivative: f64,
    pub velocity: f64,
    pub window: (f64, f64),
    pub wrap_time: f64,
    pub under_resolved: bool,
    pub samples: Vec<NormSample>,
}

/// Run the linear flow (`|u|^p` switched off) and fit `log‖·‖` against `log(1 + t)` over the
/// window. The window must end before [`wrap_time`].
pub fn measure_linear_decay(cfg: &SimConfig, u0: &[f64], u1: &[f64], window: (f64, f64)) -> Result<LinearDecayFit> {
    let (t0, t1) = window;
    if !(0.0 <= t0 && t0 < t1) {
        return Err(Error::config("decay window must satisfy 0 ≤ t0 < t1"));
    }
    let mut cfg = cfg.clone();
    cfg.nonlinear = false;
    cfg.t_end = t1;
    cfg.capture_interval = None;
    cfg.validate()?;
    let wrap = wrap_time(&cfg);
    if t1 > wrap {
        return Err(Error::OutOfRange(format!("window end {t1} exceeds the wrap-around time {wrap:.3e}")));
    }
    let rec = run_on_grid(cfg.grid.build()?, u0, u1, &cfg)?;
    let inside: Vec<&NormSample> = rec.samples.iter().filter(|s| s.t >= t0 && s.t <= t1 * (1.0 + 1e-12)).collect();
    let xs: Vec<f64> = inside.iter().map(|s| (1.0 + s.t).ln()).collect();
    let slope = |f: fn(&NormSample) -> f64| -> Result<f64> {
        let ys: Vec<f64> = inside.iter().map(|s| f(s).ln()).collect();
        linear_fit(&xs, &ys)
            .map(|(m, _)| m)
            .ok_or_else(|| Error::config("decay window holds fewer than two usable samples"))
    };
    Ok(LinearDecayFit {
        solution: slope(|s| s.l2)?,
        derivative: slope(|s| s.derivative_l2)?,
        velocity: slope(|s| s.velocity_l2)?,
        window,
        wrap_time: wrap,
        under_resolved: rec.under_resolved,
        samples: rec.samples,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanRow {
    pub epsilon: f64,
    pub verdict: Verdict,
    pub under_resolved: bool,
    pub steps: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanReport {
    pub rows: Vec<LifespanRow>,
    /// Least-squares slope of `log T_ε` against `log ε` over the rows that blew up.
    pub slope: Option<f64>,
    /// `T_ε` nondecreasing as `ε` decreases.
    pub monotone: bool,
}

/// Runs `u0 = 0`, `u1 = ε·profile` for each `ε` (in parallel on the current rayon pool) and
/// fits the lifespan exponent. Results do not depend on the number of workers.
pub fn lifespan_sweep(cfg: &SimConfig, profile: &[f64], epsilons: &[f64]) -> Result<LifespanReport> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    if profile.len() != grid.len() {
        return Err(Error::config(format!("profile must have {} samples", grid.len())));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("epsilons must be positive"));
    }
    let zero = vec![0.0; grid.len()];
    let rows = epsilons
        .par_iter()
        .map(|&eps| {
            let u1: Vec<f64> = profile.iter().map(|v| eps * v).collect();
            let rec = run_on_grid(grid.clone(), &zero, &u1, cfg)?;
            Ok(LifespanRow { epsilon: eps, verdict: rec.verdict, under_resolved: rec.under_resolved, steps: rec.steps })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.verdict.t_detect().map(|t| (r.epsilon, t))).collect();
    let slope = if pairs.len() >= 2 {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
        linear_fit(&xs, &ys).map(|f| f.0)
    } else {
        None
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = pairs.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(LifespanReport { rows, slope, monotone })
}
