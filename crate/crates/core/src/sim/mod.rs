//! Pseudo-spectral integrator on a periodic torus with blow-up detection, linear decay
//! fits and lifespan sweeps.

mod analysis;
mod config;
mod integrator;
mod propagator;
mod run;

pub use analysis::{
    gaussian_bump, lifespan_sweep, measure_linear_decay, wrap_time, LifespanReport, LifespanRow, LinearDecayFit,
};
pub use config::sha256_hex;
pub use config::{GridSpec, SimConfig};
pub use integrator::{EnergyLedger, Integrator, NormSample, SimState};
pub use propagator::linear_propagator_coefficients;
pub use run::{extrapolate_blow_up, simulate, RunRecord, Trajectory, Verdict, TAIL_LIMIT};
