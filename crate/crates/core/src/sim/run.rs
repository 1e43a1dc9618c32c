use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::integrator::{Integrator, NormSample, SimState};
use crate::fractional::TorusGrid;
use crate::Result;

/// Outcome of a run. For the two failure verdicts `t_detect` estimates the blow-up time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Completed,
    BlewUp { t_detect: f64 },
    StepCollapse { t_detect: f64 },
}

impl Verdict {
    pub fn t_detect(&self) -> Option<f64> {
        match *self {
            Verdict::Completed => None,
            Verdict::BlewUp { t_detect } | Verdict::StepCollapse { t_detect } => Some(t_detect),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Completed => "completed",
            Verdict::BlewUp { .. } => "blew-up",
            Verdict::StepCollapse { .. } => "step-collapse",
        }
    }
}

/// Solution frames captured at fixed time spacing, in the layout of [`TorusGrid`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<TorusGrid>,
    pub times: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub samples: Vec<NormSample>,
    pub verdict: Verdict,
    pub steps: u64,
    pub rejected_steps: u64,
    /// Crossing times of the levels `M/4, M/2, M` that were reached.
    pub crossings: Vec<(f64, f64)>,
    /// Largest top-octave share of `‖u‖²` seen before `‖u‖_∞` first exceeded `M/4`.
    pub max_spectral_tail: f64,
    pub under_resolved: bool,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

/// Top-octave share above which a run does not count as resolved.
pub const TAIL_LIMIT: f64 = 1e-6;

/// Blow-up time from the crossing times `t₁ < t₂ < t₃` of `M/4, M/2, M`. For
/// `‖u‖_∞ ~ c (T - t)^{-β}` the gaps form a geometric sequence and Aitken's
/// `t₃ + d₂²/(d₁ - d₂)` is exact.
pub fn extrapolate_blow_up(crossings: &[f64]) -> Option<f64> {
    if crossings.len() < 3 {
        return None;
    }
    let (t1, t2, t3) = (crossings[0], crossings[1], crossings[2]);
    let d1 = t2 - t1;
    let d2 = t3 - t2;
    if d1 > d2 && d2 >= 0.0 {
        Some(t3 + d2 * d2 / (d1 - d2))
    } else {
        Some(t3)
    }
}

struct Driver {
    integrator: Integrator,
    samples: Vec<NormSample>,
    levels: [f64; 3],
    crossings: Vec<(f64, f64)>,
    max_tail: f64,
    tail_open: bool,
    trajectory: Option<Trajectory>,
}

impl Driver {
    fn record(&mut self, state: &SimState) {
        let sample = self.integrator.norms(state);
        if self.tail_open {
            self.max_tail = self.max_tail.max(self.integrator.spectral_tail(state));
        }
        self.samples.push(sample);
    }

    fn capture(&mut self, state: &SimState) {
        if let Some(tr) = self.trajectory.as_mut() {
            tr.times.push(state.t);
            tr.frames.push(state.u().to_vec());
        }
    }

    fn note_crossings(&mut self, before: (f64, f64), after: (f64, f64)) {
        let (t0, u0) = before;
        let (t1, u1) = after;
        for &level in &self.levels {
            if u0 < level && u1 >= level {
                let t = if u0 > 0.0 && u1 > u0 { t0 + (t1 - t0) * (level / u0).ln() / (u1 / u0).ln() } else { t1 };
                self.crossings.push((level, t));
            }
        }
        if u1 > self.levels[0] {
            self.tail_open = false;
        }
    }
}

/// Integrate `u_tt + (-Δ)^σ u + (-Δ)^δ u_t = |u|^p` from `(u0, u1)` until `t_end`, blow-up
/// (`‖u‖_∞ > M`) or step collapse (`dt < dt_min`).
pub fn simulate(u0: &[f64], u1: &[f64], cfg: &SimConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    run_on_grid(grid, u0, u1, cfg)
}

pub(crate) fn run_on_grid(grid: Arc<TorusGrid>, u0: &[f64], u1: &[f64], cfg: &SimConfig) -> Result<RunRecord> {
    let integrator = Integrator::new(grid.clone(), &cfg.params, cfg.nonlinear);
    let mut state = integrator.initial_state(u0, u1)?;
    let m = cfg.threshold;
    let mut drv = Driver {
        integrator,
        samples: Vec::new(),
        levels: [m / 4.0, m / 2.0, m],
        crossings: Vec::new(),
        max_tail: 0.0,
        tail_open: true,
        trajectory: cfg.capture_interval.map(|_| Trajectory { grid, times: Vec::new(), frames: Vec::new() }),
    };
    drv.record(&state);
    drv.capture(&state);

    let gap_tol = 1e-9;
    let mut next_record = cfg.record_interval;
    let mut next_capture = cfg.capture_interval.unwrap_or(f64::INFINITY);
    let mut dt = cfg.dt;
    let mut steps = 0u64;
    let mut rejected = 0u64;
    let expo = 0.5 * (cfg.params.p - 1.0);

    let verdict = loop {
        let sup = state.sup_norm();
        if sup > m {
            break blow_up_verdict(&drv.crossings, state.t, false);
        }
        let remaining = cfg.t_end - state.t;
        if remaining <= gap_tol * cfg.dt {
            break Verdict::Completed;
        }
        if steps >= cfg.max_steps {
            break blow_up_verdict(&drv.crossings, state.t, true);
        }
        let mut h = dt.min(remaining).min(next_record - state.t).min(next_capture - state.t);
        if cfg.nonlinear && sup > 0.0 {
            h = h.min(cfg.cfl * sup.powf(-expo));
        }
        if h < cfg.dt_min {
            break blow_up_verdict(&drv.crossings, state.t, true);
        }
        let trial = drv.integrator.step(&state, h);
        if !trial.is_finite() || (sup > 0.0 && trial.sup_norm() > 2.0 * sup) {
            rejected += 1;
            dt = 0.5 * h;
            if dt < cfg.dt_min {
                break blow_up_verdict(&drv.crossings, state.t, !trial.is_finite());
            }
            continue;
        }
        drv.note_crossings((state.t, sup), (trial.t, trial.sup_norm()));
        state = trial;
        steps += 1;
        dt = (dt * 1.25).min(cfg.dt);
        if state.t >= next_record - gap_tol * cfg.record_interval {
            drv.record(&state);
            next_record += cfg.record_interval;
        }
        if state.t >= next_capture - gap_tol * cfg.dt {
            drv.capture(&state);
            next_capture += cfg.capture_interval.unwrap_or(f64::INFINITY);
        }
    };
    if drv.samples.last().map(|s| s.t) != Some(state.t) {
        drv.record(&state);
    }
    Ok(RunRecord {
        config_hash: cfg.hash(),
        samples: drv.samples,
        verdict,
        steps,
        rejected_steps: rejected,
        crossings: drv.crossings,
        max_spectral_tail: drv.max_tail,
        under_resolved: drv.max_tail > TAIL_LIMIT,
        trajectory: drv.trajectory,
    })
}

fn blow_up_verdict(crossings: &[(f64, f64)], t_last: f64, collapse: bool) -> Verdict {
    let times: Vec<f64> = crossings.iter().map(|c| c.1).collect();
    let t_detect = extrapolate_blow_up(&times).unwrap_or(t_last);
    if collapse {
        Verdict::StepCollapse { t_detect }
    } else {
        Verdict::BlewUp { t_detect }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::GridSpec;
    use crate::testfn::ModelParams;

    #[test]
    fn aitken_is_exact_for_power_laws() {
        for &beta in &[0.5, 1.0, 2.0] {
            let big_t = 3.7;
            let levels = [250.0, 500.0, 1000.0];
            let times: Vec<f64> = levels.iter().map(|l: &f64| big_t - l.powf(-1.0 / beta)).collect();
            let est = extrapolate_blow_up(&times).unwrap();
            assert!((est - big_t).abs() < 1e-12, "β={beta}: {est}");
        }
        assert_eq!(extrapolate_blow_up(&[1.0, 2.0]), None);
    }

    #[test]
    fn ode_blow_up_time() {
        // spatially constant data reduce to ü = u², u(0) = 1, u̇(0) = √(2/3):
        // energy ½u̇² - u³/3 = 0 gives u = (1 - t/√6)^{-2}, T = √6
        let params = ModelParams::new(1.0, 0.5, 1, 2.0).unwrap();
        let grid = GridSpec { n: 1, half_extent: 4.0, points: 8 };
        let mut cfg = SimConfig::new(params, grid, 1e-2, 10.0);
        cfg.threshold = 1e6;
        cfg.cfl = 0.02;
        let u0 = vec![1.0; 8];
        let u1 = vec![(2.0f64 / 3.0).sqrt(); 8];
        let rec = simulate(&u0, &u1, &cfg).unwrap();
        let t = rec.verdict.t_detect().unwrap();
        assert!(matches!(rec.verdict, Verdict::BlewUp { .. }));
        assert!((t - 6f64.sqrt()).abs() < 1e-4, "{t}");
        assert_eq!(rec.crossings.len(), 3);
    }

    #[test]
    fn completes_and_records_monotone_times() {
        let params = ModelParams::new(1.0, 0.0, 1, 4.0).unwrap();
        let grid = GridSpec { n: 1, half_extent: 32.0, points: 256 };
        let mut cfg = SimConfig::new(params, grid, 0.1, 5.0);
        cfg.record_interval = 0.5;
        cfg.capture_interval = Some(1.0);
        let g = cfg.grid.build().unwrap();
        let u1: Vec<f64> = g.coordinates().map(|x| 0.01 * (-x[0] * x[0]).exp()).collect();
        let rec = simulate(&vec![0.0; 256], &u1, &cfg).unwrap();
        assert_eq!(rec.verdict, Verdict::Completed);
        assert!(rec.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(rec.samples.len(), 11);
        assert!((rec.samples.last().unwrap().t - 5.0).abs() < 1e-12);
        let tr = rec.trajectory.unwrap();
        assert_eq!(tr.times.len(), 6);
        assert!(tr.times.iter().enumerate().all(|(i, &t)| (t - i as f64).abs() < 1e-9));
        assert!(!rec.under_resolved);
    }

    #[test]
    fn terminates_with_unreachable_limits() {
        let params = ModelParams::new(1.0, 0.0, 1, 2.0).unwrap();
        let grid = GridSpec { n: 1, half_extent: 8.0, points: 32 };
        let mut cfg = SimConfig::new(params, grid, 0.5, 3.0);
        cfg.threshold = f64::MAX;
        cfg.dt_min = 1e-300;
        let rec = simulate(&vec![0.0; 32], &vec![0.0; 32], &cfg).unwrap();
        assert_eq!(rec.verdict, Verdict::Completed);
        assert_eq!(rec.steps, 6);
    }
}
