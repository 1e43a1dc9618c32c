use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagator::linear_propagator_coefficients;
use crate::fractional::TorusGrid;
use crate::testfn::ModelParams;
use crate::{Error, Result};

/// Below this many modes the per-mode loops run serially.
const PARALLEL_MODES: usize = 1 << 15;

/// Solution at one time: spectra of `u` and `u_t`, the physical `u`, and the spectrum of
/// `|u|^p` at that `u` (reused by the next half kick).
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    u: Vec<f64>,
    source_hat: Vec<Complex64>,
}

impl SimState {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_spectrum(&self) -> &[Complex64] {
        &self.u_hat
    }

    pub fn velocity_spectrum(&self) -> &[Complex64] {
        &self.v_hat
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite()) && self.v_hat.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Norms recorded along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub t: f64,
    pub l2: f64,
    pub sup: f64,
    pub velocity_l2: f64,
    /// `‖|D|^{k⁺} u‖_{L²}`.
    pub derivative_l2: f64,
}

/// `(E, D, W)` with `E = ½‖u_t‖² + ½‖|D|^σ u‖²`, `D = ‖|D|^δ u_t‖²`, `W = ∫ |u|^p u_t`, so
/// that `dE/dt = -D + W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub energy: f64,
    pub dissipation: f64,
    pub work: f64,
}

/// Strang-split integrator: half kick `u_t += dt/2 |u|^p`, exact linear flow per mode,
/// half kick. The symbols are `|ξ|^{2σ}` and `|ξ|^{2δ}` with `0^0 = 1`, so for `δ = 0`
/// the friction term acts on the mean as well.
#[derive(Debug)]
pub struct Integrator {
    grid: Arc<TorusGrid>,
    p: f64,
    nonlinear: bool,
    sym_sigma: Vec<f64>,
    sym_delta: Vec<f64>,
    sym_kplus: Vec<f64>,
    top_octave: Vec<bool>,
}

impl Integrator {
    pub fn new(grid: Arc<TorusGrid>, params: &ModelParams, nonlinear: bool) -> Self {
        let xi = grid.xi_squared();
        let power = |e: f64| xi.iter().map(|&k2| k2.powf(e)).collect::<Vec<_>>();
        let np = grid.points();
        let quarter = np / 4;
        let top_octave = (0..grid.len())
            .map(|idx| {
                let mut rem = idx;
                (0..grid.dim()).any(|_| {
                    let k = rem % np;
                    rem /= np;
                    k.min(np - k) > quarter
                })
            })
            .collect();
        Self {
            sym_sigma: power(params.sigma),
            sym_delta: power(params.delta),
            sym_kplus: power(params.k_plus()),
            grid,
            p: params.p,
            nonlinear,
            top_octave,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    fn power(&self, u: &[f64]) -> Vec<f64> {
        if self.p == 2.0 {
            u.iter().map(|v| v * v).collect()
        } else {
            u.iter().map(|v| v.abs().powf(self.p)).collect()
        }
    }

    fn source_spectrum(&self, u: &[f64]) -> Vec<Complex64> {
        if self.nonlinear {
            self.grid.forward(&self.power(u))
        } else {
            vec![Complex64::new(0.0, 0.0); u.len()]
        }
    }

    pub fn initial_state(&self, u0: &[f64], u1: &[f64]) -> Result<SimState> {
        let len = self.grid.len();
        if u0.len() != len || u1.len() != len {
            return Err(Error::config(format!("initial data must have {len} samples")));
        }
        if !u0.iter().chain(u1).all(|v| v.is_finite()) {
            return Err(Error::domain("initial data must be finite"));
        }
        Ok(SimState {
            t: 0.0,
            u_hat: self.grid.forward(u0),
            v_hat: self.grid.forward(u1),
            u: u0.to_vec(),
            source_hat: self.source_spectrum(u0),
        })
    }

    /// One Strang step of length `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> SimState {
        let mut u_hat = state.u_hat.clone();
        let mut v_hat = state.v_hat.clone();
        let half = 0.5 * dt;
        let nonlinear = self.nonlinear;
        let update = |(i, (u, v)): (usize, (&mut Complex64, &mut Complex64))| {
            let m = linear_propagator_coefficients(self.sym_sigma[i], self.sym_delta[i], dt);
            let w = if nonlinear { *v + state.source_hat[i] * half } else { *v };
            let nu = *u * m[0][0] + w * m[0][1];
            let nv = *u * m[1][0] + w * m[1][1];
            *u = nu;
            *v = nv;
        };
        if u_hat.len() >= PARALLEL_MODES {
            u_hat.par_iter_mut().zip(v_hat.par_iter_mut()).enumerate().for_each(update);
        } else {
            u_hat.iter_mut().zip(v_hat.iter_mut()).enumerate().for_each(update);
        }
        let u = self.grid.inverse(u_hat.clone());
        let source_hat = self.source_spectrum(&u);
        if nonlinear {
            for (v, s) in v_hat.iter_mut().zip(&source_hat) {
                *v += s * half;
            }
        }
        SimState { t: state.t + dt, u_hat, v_hat, u, source_hat }
    }

    pub fn norms(&self, state: &SimState) -> NormSample {
        let g = &self.grid;
        let weighted = |spec: &[Complex64], sym: Option<&[f64]>| -> f64 {
            let sum: f64 = match sym {
                Some(w) => spec.iter().zip(w).map(|(c, w)| w * c.norm_sqr()).sum(),
                None => spec.iter().map(|c| c.norm_sqr()).sum(),
            };
            (sum * g.cell_volume() / g.len() as f64).sqrt()
        };
        NormSample {
            t: state.t,
            l2: weighted(&state.u_hat, None),
            sup: state.sup_norm(),
            velocity_l2: weighted(&state.v_hat, None),
            derivative_l2: weighted(&state.u_hat, Some(&self.sym_kplus)),
        }
    }

    pub fn energy_ledger(&self, state: &SimState) -> EnergyLedger {
        let g = &self.grid;
        let factor = g.cell_volume() / g.len() as f64;
        let mut kinetic = 0.0;
        let mut potential = 0.0;
        let mut dissipation = 0.0;
        for i in 0..g.len() {
            let v2 = state.v_hat[i].norm_sqr();
            kinetic += v2;
            potential += self.sym_sigma[i] * state.u_hat[i].norm_sqr();
            dissipation += self.sym_delta[i] * v2;
        }
        let work = if self.nonlinear {
            let ut = g.inverse(state.v_hat.clone());
            let pw = self.power(&state.u);
            pw.iter().zip(&ut).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume()
        } else {
            0.0
        };
        EnergyLedger { energy: 0.5 * (kinetic + potential) * factor, dissipation: dissipation * factor, work }
    }

    /// Share of `‖u‖²` carried by modes whose largest axis wavenumber exceeds `N/4`.
    pub fn spectral_tail(&self, state: &SimState) -> f64 {
        let mut total = 0.0;
        let mut tail = 0.0;
        for (c, &top) in state.u_hat.iter().zip(&self.top_octave) {
            let e = c.norm_sqr();
            total += e;
            if top {
                tail += e;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Velocity `u_t` in physical space.
    pub fn velocity(&self, state: &SimState) -> Vec<f64> {
        self.grid.inverse(state.v_hat.clone())
    }

    /// Largest imaginary part left by inverting the stored spectra, relative to the real
    /// parts. Zero up to rounding for a Hermitian-symmetric state.
    pub fn imaginary_residual(&self, state: &SimState) -> f64 {
        let mut worst: f64 = 0.0;
        for spec in [&state.u_hat, &state.v_hat] {
            let z = self.grid.inverse_complex(spec.clone());
            let re = z.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
            let im = z.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
            if re > 0.0 {
                worst = worst.max(im / re);
            } else {
                worst = worst.max(im);
            }
        }
        worst
    }
}
