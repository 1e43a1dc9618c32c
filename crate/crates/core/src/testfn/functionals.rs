use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::TemporalCutoff;
use super::params::ModelParams;
use super::weight::SpatialWeightChoice;
use crate::fit::linear_fit;
use crate::fractional::{fractional_laplacian_of_weight, FractionalOrder, QuadratureScheme, RadialWeight, TorusGrid};
use crate::sim::Trajectory;
use crate::{Error, Result};

/// Largest admissible ratio of the integrand envelope on the box boundary to its maximum.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

const PROFILE_NODES: usize = 2048;

/// Radial profile `g(ρ) = (-Δ)^γ ⟨·⟩^{-q}` at `|x| = ρ`. Integer orders are evaluated
/// exactly; fractional orders go through the quadrature on a table uniform in `asinh ρ`
/// with four-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    weight: RadialWeight,
    order: FractionalOrder,
    table: Option<(f64, Vec<f64>)>,
}

impl RadialProfile {
    pub fn new(n: usize, q: f64, gamma: f64, rho_max: f64, scheme: &QuadratureScheme) -> Result<Self> {
        let weight = RadialWeight::new(n, q)?;
        let order = FractionalOrder::new(gamma)?;
        if order.fractional_part() == 0.0 {
            return Ok(Self { weight, order, table: None });
        }
        let step = rho_max.max(1.0).asinh() / PROFILE_NODES as f64;
        let values = (0..PROFILE_NODES + 3)
            .into_par_iter()
            .map(|j| {
                let mut x = vec![0.0; n];
                x[0] = (j as f64 * step).sinh();
                fractional_laplacian_of_weight(&weight, order, &x, scheme).map(|r| r.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { weight, order, table: Some((step, values)) })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let Some((step, values)) = &self.table else {
            let x = [rho, 0.0, 0.0];
            let x = &x[..self.weight.dim()];
            let m = self.order.integer_part();
            return if m == 0 {
                self.weight.eval(x)
            } else {
                crate::fractional::iterated_laplacian(&self.weight, m).eval(x)
            };
        };
        let tau = rho.asinh() / step;
        let last = values.len() - 3;
        let base = (tau.floor() as usize).min(last);
        let f = tau - base as f64;
        // nodes base-1 .. base+2; g is even in τ, so node -1 mirrors node 1
        let at = |j: isize| values[j.unsigned_abs()];
        let b = base as isize;
        let (y0, y1, y2, y3) = (at(b - 1), at(b), at(b + 1), at(b + 2));
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
        w0 * y0 + w1 * y1 + w2 * y2 + w3 * y3
    }
}

/// Sampled solution and data entering the weak formulation.
#[derive(Debug, Clone, Copy)]
pub struct WeakFormData<'a> {
    pub trajectory: &'a Trajectory,
    pub u0: &'a [f64],
    pub u1: &'a [f64],
    /// Replaces `|u|^p` on the left-hand side, frame by frame (manufactured solutions).
    pub source: Option<&'a [Vec<f64>]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub r: f64,
    /// `∫∫ |u|^p η_R φ_R`.
    pub i_r: f64,
    /// The same integral restricted to `t ∈ [R^α/2, R^α]`.
    pub i_r_t: f64,
    /// `∫∫ u ∂²_t η_R φ_R`.
    pub j1: f64,
    /// `∫∫ η_R u (-Δ)^σ φ_R`.
    pub j2: f64,
    /// `∫∫ ∂_t η_R u (-Δ)^δ φ_R`.
    pub j3: f64,
    /// `∫ u₁ φ_R`.
    pub data_term: f64,
    /// `∫ u₀ (-Δ)^δ φ_R`, zero for the blow-up data class `u₀ = 0`.
    pub u0_term: f64,
    /// `|I_R - (-data + J₁ + J₂ - J₃ - u0_term)|`.
    pub identity_residual: f64,
    /// `(∫∫ η_R^{-p'/p} |∂²_t η_R|^{p'} φ_R)^{1/p'}`, the partner of `I_{R,t}^{1/p}` in the
    /// Hölder bound for `J₁`.
    pub holder_factor: f64,
    pub leakage: f64,
    /// Whether `I_R` was built from `|u|^p` (as opposed to a supplied source).
    pub from_power: bool,
}

impl FunctionalReport {
    /// `|J₁| ≤ I_{R,t}^{1/p} · holder_factor`, up to rounding. Only meaningful when the left
    /// side was built from `|u|^p`.
    pub fn holder_holds(&self, p: f64) -> bool {
        let bound = self.i_r_t.powf(1.0 / p) * self.holder_factor;
        self.j1.abs() <= bound * (1.0 + 1e-12) + 1e-300
    }
}

struct SpatialTables {
    phi: Vec<f64>,
    lap_sigma: Vec<f64>,
    lap_delta: Vec<f64>,
}

fn radii(grid: &TorusGrid) -> Vec<f64> {
    let n = grid.dim();
    grid.coordinates().map(|x| x[..n].iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
}

fn max_radius(grid: &TorusGrid) -> f64 {
    grid.half_extent() * (grid.dim() as f64).sqrt()
}

struct Profiles {
    phi: RadialProfile,
    sigma: RadialProfile,
    delta: RadialProfile,
}

impl Profiles {
    fn new(
        params: &ModelParams,
        weight: &SpatialWeightChoice,
        rho_max: f64,
        scheme: &QuadratureScheme,
    ) -> Result<Self> {
        let n = params.n;
        Ok(Self {
            phi: RadialProfile::new(n, weight.q, 0.0, rho_max, scheme)?,
            sigma: RadialProfile::new(n, weight.q, params.sigma, rho_max, scheme)?,
            delta: RadialProfile::new(n, weight.q, params.delta, rho_max, scheme)?,
        })
    }

    fn tables(&self, params: &ModelParams, radii: &[f64], r: f64) -> SpatialTables {
        let ss = r.powf(-2.0 * params.sigma);
        let sd = r.powf(-2.0 * params.delta);
        SpatialTables {
            phi: radii.iter().map(|&x| self.phi.eval(x / r)).collect(),
            lap_sigma: radii.iter().map(|&x| ss * self.sigma.eval(x / r)).collect(),
            lap_delta: radii.iter().map(|&x| sd * self.delta.eval(x / r)).collect(),
        }
    }
}

fn check_inputs(data: &WeakFormData, params: &ModelParams) -> Result<()> {
    let tr = data.trajectory;
    let len = tr.grid.len();
    if tr.grid.dim() != params.n {
        return Err(Error::config("trajectory dimension differs from the model dimension"));
    }
    if data.u0.len() != len || data.u1.len() != len || tr.frames.iter().any(|f| f.len() != len) {
        return Err(Error::config(format!("all fields must have {len} samples")));
    }
    if tr.times.len() != tr.frames.len() || tr.times.len() < 2 {
        return Err(Error::config("trajectory needs matching times and frames, at least two"));
    }
    if tr.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("trajectory times must increase"));
    }
    if tr.times[0].abs() > 1e-12 {
        return Err(Error::config("trajectory must start at t = 0"));
    }
    if let Some(src) = data.source {
        if src.len() != tr.frames.len() || src.iter().any(|f| f.len() != len) {
            return Err(Error::config("source must have one frame per trajectory frame"));
        }
    }
    Ok(())
}

fn evaluate_with(
    data: &WeakFormData,
    params: &ModelParams,
    cutoff: &TemporalCutoff,
    tables: &SpatialTables,
) -> Result<FunctionalReport> {
    let tr = data.trajectory;
    let horizon = cutoff.horizon();
    let t_last = *tr.times.last().expect("checked non-empty");
    if t_last < horizon * (1.0 - 1e-12) {
        return Err(Error::OutOfRange(format!(
            "trajectory ends at {t_last} before the cutoff horizon R^α = {horizon}"
        )));
    }
    let p = params.p;
    let pc = params.p_conjugate();
    let vol = tr.grid.cell_volume();
    let phi = &tables.phi;

    // A supplied source is excluded: |u|^p is dominated by the envelope of u, while
    // manufactured sources may carry (-Δ)^δ tails that are the caller's responsibility.
    let mut envelope: Vec<f64> = data.u0.iter().zip(data.u1).map(|(a, b)| a.abs().max(b.abs())).collect();
    for frame in &tr.frames {
        for (e, v) in envelope.iter_mut().zip(frame) {
            *e = e.max(v.abs());
        }
    }
    let mut inner = 0.0f64;
    let mut edge = 0.0f64;
    for (i, (e, w)) in envelope.iter().zip(phi).enumerate() {
        let v = e * w;
        inner = inner.max(v);
        if tr.grid.is_boundary(i) {
            edge = edge.max(v);
        }
    }
    let leakage = if inner > 0.0 { edge / inner } else { 0.0 };
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::BoundaryLeakage { measured: leakage, limit: LEAKAGE_LIMIT });
    }

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * vol;
    let data_term = dot(data.u1, phi);
    let u0_term = dot(data.u0, &tables.lap_delta);
    let phi_mass = phi.iter().sum::<f64>() * vol;

    let times = &tr.times;
    let count = times.len();
    let (mut i_r, mut i_r_t, mut j1, mut j2, mut j3, mut holder) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..count {
        let t = times[k];
        if t >= horizon {
            break;
        }
        let left = if k > 0 { t - times[k - 1] } else { 0.0 };
        let right = if k + 1 < count { times[k + 1] - t } else { 0.0 };
        let w = 0.5 * (left + right);
        let (eta, eta1, eta2) = cutoff.eval(t);
        let u = &tr.frames[k];
        let lhs = match data.source {
            Some(src) => dot(&src[k], phi),
            None => u.iter().zip(phi).map(|(v, f)| v.abs().powf(p) * f).sum::<f64>() * vol,
        };
        i_r += w * eta * lhs;
        if t >= 0.5 * horizon {
            i_r_t += w * eta * lhs;
        }
        if eta2 != 0.0 {
            j1 += w * eta2 * dot(u, phi);
            holder += w * cutoff.holder_weight_second(p, t) * phi_mass;
        }
        j2 += w * eta * dot(u, &tables.lap_sigma);
        if eta1 != 0.0 {
            j3 += w * eta1 * dot(u, &tables.lap_delta);
        }
    }
    let rhs = -data_term + j1 + j2 - j3 - u0_term;
    Ok(FunctionalReport {
        r: cutoff.scale,
        i_r,
        i_r_t,
        j1,
        j2,
        j3,
        data_term,
        u0_term,
        identity_residual: (i_r - rhs).abs(),
        holder_factor: holder.powf(1.0 / pc),
        leakage,
        from_power: data.source.is_none(),
    })
}

/// Discrete weak-form functionals for the test function `η_R(t) φ(x/R)`, with
/// `φ = ⟨x⟩^{-q}` and `R = cutoff.scale`. Time integrals use the trapezoid rule on the
/// trajectory times, space integrals the periodic trapezoid rule on its grid.
pub fn evaluate_functionals(
    data: &WeakFormData,
    params: &ModelParams,
    weight: &SpatialWeightChoice,
    cutoff: &TemporalCutoff,
    scheme: &QuadratureScheme,
) -> Result<FunctionalReport> {
    params.validate()?;
    check_inputs(data, params)?;
    let grid = &data.trajectory.grid;
    let r = cutoff.scale;
    let profiles = Profiles::new(params, weight, max_radius(grid) / r, scheme)?;
    let tables = profiles.tables(params, &radii(grid), r);
    evaluate_with(data, params, cutoff, &tables)
}

/// [`evaluate_functionals`] over a ladder of scales `R` with `α = 2σ - k⁻`, evaluated in
/// parallel; the weight profiles are tabulated once.
pub fn evaluate_ladder(
    data: &WeakFormData,
    params: &ModelParams,
    weight: &SpatialWeightChoice,
    scales: &[f64],
    scheme: &QuadratureScheme,
) -> Result<Vec<FunctionalReport>> {
    params.validate()?;
    check_inputs(data, params)?;
    let Some(r_min) = scales.iter().copied().reduce(f64::min) else {
        return Ok(Vec::new());
    };
    let grid = &data.trajectory.grid;
    let profiles = Profiles::new(params, weight, max_radius(grid) / r_min, scheme)?;
    let rad = radii(grid);
    scales
        .par_iter()
        .map(|&r| {
            let cutoff = TemporalCutoff::new(r, params.alpha())?;
            let tables = profiles.tables(params, &rad, r);
            evaluate_with(data, params, &cutoff, &tables)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContradictionVerdict {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub exponent: f64,
}

/// Compares `∫ u₁ φ_R` with `R^{-2σp' + n + α}`.
pub fn check_contradiction_bound(report: &FunctionalReport, params: &ModelParams) -> Result<ContradictionVerdict> {
    if !(report.data_term > 0.0) {
        return Err(Error::Assumption(format!(
            "the initial velocity must have positive weighted mass, got ∫u₁φ_R = {}",
            report.data_term
        )));
    }
    let exponent = params.contradiction_exponent();
    let rhs = report.r.powf(exponent);
    Ok(ContradictionVerdict { r: report.r, lhs: report.data_term, rhs, ratio: report.data_term / rhs, exponent })
}

/// Slope of `log rhs` against `log R` over a ladder of verdicts.
pub fn contradiction_slope(verdicts: &[ContradictionVerdict]) -> Option<f64> {
    let xs: Vec<f64> = verdicts.iter().map(|v| v.r.ln()).collect();
    let ys: Vec<f64> = verdicts.iter().map(|v| v.rhs.ln()).collect();
    linear_fit(&xs, &ys).map(|f| f.0)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::testfn::weight::spatial_weight_for;

    fn zero_trajectory(grid: Arc<TorusGrid>, t_end: f64, frames: usize) -> Trajectory {
        let times: Vec<f64> = (0..frames).map(|k| t_end * k as f64 / (frames - 1) as f64).collect();
        let len = grid.len();
        Trajectory { grid, frames: vec![vec![0.0; len]; frames], times }
    }

    #[test]
    fn profile_interpolation_matches_quadrature() {
        let scheme = QuadratureScheme::default();
        let prof = RadialProfile::new(1, 1.5, 0.5, 200.0, &scheme).unwrap();
        let w = RadialWeight::new(1, 1.5).unwrap();
        let order = FractionalOrder::new(0.5).unwrap();
        for &r in &[0.0, 0.37, 1.9, 13.3, 151.0] {
            let exact = fractional_laplacian_of_weight(&w, order, &[r], &scheme).unwrap().value;
            assert!((prof.eval(r) - exact).abs() < 1e-7 * exact.abs().max(1e-3), "r={r}");
        }
        let int = RadialProfile::new(2, 3.0, 1.0, 10.0, &scheme).unwrap();
        let exact = crate::fractional::iterated_laplacian(&RadialWeight::new(2, 3.0).unwrap(), 1).eval(&[0.7, 0.0]);
        assert_eq!(int.eval(0.7), exact);
    }

    #[test]
    fn zero_solution_gives_zero_functionals() {
        let grid = Arc::new(TorusGrid::new(1, 64.0, 256).unwrap());
        let params = ModelParams::new(1.0, 0.0, 1, 2.0).unwrap();
        let weight = spatial_weight_for(1.0, 0.0, 1).unwrap();
        let tr = zero_trajectory(grid.clone(), 4.0, 41);
        let zero = vec![0.0; grid.len()];
        let data = WeakFormData { trajectory: &tr, u0: &zero, u1: &zero, source: None };
        let cutoff = TemporalCutoff::new(2.0, params.alpha()).unwrap();
        let rep = evaluate_functionals(&data, &params, &weight, &cutoff, &QuadratureScheme::default()).unwrap();
        for v in [rep.i_r, rep.i_r_t, rep.j1, rep.j2, rep.j3, rep.data_term, rep.identity_residual] {
            assert_eq!(v, 0.0);
        }
        assert!(matches!(check_contradiction_bound(&rep, &params), Err(Error::Assumption(_))));
    }

    #[test]
    fn time_independent_solution_only_feels_the_transition() {
        let grid = Arc::new(TorusGrid::new(1, 64.0, 256).unwrap());
        let params = ModelParams::new(1.0, 0.0, 1, 2.0).unwrap();
        let weight = spatial_weight_for(1.0, 0.0, 1).unwrap();
        let mut tr = zero_trajectory(grid.clone(), 4.0, 401);
        let g: Vec<f64> = grid.coordinates().map(|x| (-x[0] * x[0] / 8.0).exp()).collect();
        for f in tr.frames.iter_mut() {
            f.copy_from_slice(&g);
        }
        let zero = vec![0.0; grid.len()];
        let data = WeakFormData { trajectory: &tr, u0: &g, u1: &zero, source: None };
        let cutoff = TemporalCutoff::new(2.0, params.alpha()).unwrap();
        let rep = evaluate_functionals(&data, &params, &weight, &cutoff, &QuadratureScheme::default()).unwrap();
        // ∫ η'' = η'(R^α) - η'(0) = 0 and ∫ η' = -1 for a time-independent profile
        let phi_dot_g = {
            let prof = RadialProfile::new(1, weight.q, 0.0, 100.0, &QuadratureScheme::default()).unwrap();
            g.iter().zip(grid.coordinates()).map(|(v, x)| v * prof.eval(x[0].abs() / 2.0)).sum::<f64>()
                * grid.cell_volume()
        };
        assert!(rep.j1.abs() < 1e-6 * phi_dot_g, "{}", rep.j1);
        assert!((rep.j3 + phi_dot_g).abs() < 1e-6 * phi_dot_g);
        assert!(rep.i_r >= rep.i_r_t && rep.i_r_t > 0.0);
        assert!(rep.holder_holds(params.p));
    }

    #[test]
    fn refuses_leaky_boxes_and_short_trajectories() {
        let grid = Arc::new(TorusGrid::new(1, 8.0, 64).unwrap());
        let params = ModelParams::new(1.0, 0.0, 1, 2.0).unwrap();
        let weight = spatial_weight_for(1.0, 0.0, 1).unwrap();
        let tr = zero_trajectory(grid.clone(), 4.0, 11);
        let ones = vec![1.0; grid.len()];
        let zero = vec![0.0; grid.len()];
        let data = WeakFormData { trajectory: &tr, u0: &zero, u1: &ones, source: None };
        let cutoff = TemporalCutoff::new(2.0, params.alpha()).unwrap();
        let err = evaluate_functionals(&data, &params, &weight, &cutoff, &QuadratureScheme::default()).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeakage { .. }));
        let cutoff = TemporalCutoff::new(3.0, params.alpha()).unwrap();
        let data = WeakFormData { trajectory: &tr, u0: &zero, u1: &zero, source: None };
        let err = evaluate_functionals(&data, &params, &weight, &cutoff, &QuadratureScheme::default()).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(_)));
    }

    #[test]
    fn contradiction_ladder_slope() {
        let params = ModelParams::new(1.0, 0.5, 3, 1.5).unwrap();
        let verdicts: Vec<_> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&r| {
                let rep = FunctionalReport {
                    r,
                    i_r: 0.0,
                    i_r_t: 0.0,
                    j1: 0.0,
                    j2: 0.0,
                    j3: 0.0,
                    data_term: 1.0,
                    u0_term: 0.0,
                    identity_residual: 0.0,
                    holder_factor: 0.0,
                    leakage: 0.0,
                    from_power: true,
                };
                check_contradiction_bound(&rep, &params).unwrap()
            })
            .collect();
        let slope = contradiction_slope(&verdicts).unwrap();
        assert!((slope - params.contradiction_exponent()).abs() < 1e-12);
        assert_eq!(params.contradiction_exponent(), -2.0);
    }
}
