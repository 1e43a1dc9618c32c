use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Uniform periodic grid on `[-L, L)ⁿ` with `N` points per axis and cached FFT plans.
pub struct TorusGrid {
    n: usize,
    half_extent: f64,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    xi_sq: Vec<f64>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n", &self.n)
            .field("half_extent", &self.half_extent)
            .field("points", &self.points)
            .finish()
    }
}

impl TorusGrid {
    pub fn new(n: usize, half_extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::config(format!("torus dimension must be 1, 2 or 3, got {n}")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::config(format!("points per axis must be a power of two, got {points}")));
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::config("half extent must be positive"));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let k0 = PI / half_extent;
        let axis: Vec<f64> = (0..points)
            .map(|k| {
                let kk = if k <= points / 2 { k as f64 } else { k as f64 - points as f64 };
                let xi = k0 * kk;
                xi * xi
            })
            .collect();
        let total = points.pow(n as u32);
        let xi_sq = (0..total)
            .map(|idx| {
                let mut rem = idx;
                let mut sum = 0.0;
                for _ in 0..n {
                    sum += axis[rem % points];
                    rem /= points;
                }
                sum
            })
            .collect();
        Ok(Self { n, half_extent, points, forward, inverse, xi_sq })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.xi_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_sq.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// `|ξ|²` for each flattened spectral index.
    pub fn xi_squared(&self) -> &[f64] {
        &self.xi_sq
    }

    /// Coordinates of the node with flattened index `idx`; the last axis varies fastest.
    pub fn coordinate(&self, idx: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut rem = idx;
        let h = self.spacing();
        for axis in (0..self.n).rev() {
            out[axis] = -self.half_extent + (rem % self.points) as f64 * h;
            rem /= self.points;
        }
        out
    }

    pub fn coordinates(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(|i| self.coordinate(i))
    }

    /// True for nodes on the faces `x_i = -L` of the periodic box.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let mut rem = idx;
        for _ in 0..self.n {
            if rem.is_multiple_of(self.points) {
                return true;
            }
            rem /= self.points;
        }
        false
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let np = self.points;
        let mut line = vec![Complex64::new(0.0, 0.0); np];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.n {
            // axis 0 is the slowest index
            let stride = np.pow((self.n - 1 - axis) as u32);
            let block = stride * np;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[start + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[start + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalised forward DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Normalised inverse DFT, returning the full complex samples.
    pub fn inverse_complex(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in spectrum.iter_mut() {
            *v *= scale;
        }
        spectrum
    }

    /// Normalised inverse DFT keeping the real part.
    pub fn inverse(&self, spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    /// `∫ |v|² dx` from spectral coefficients (Parseval), with `|ξ|²`-dependent weights.
    pub fn weighted_energy(&self, spectrum: &[Complex64], weight: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = spectrum.iter().zip(&self.xi_sq).map(|(c, &k2)| weight(k2) * c.norm_sqr()).sum();
        sum * self.cell_volume() / self.len() as f64
    }
}

/// A real field sampled on a torus grid, with a lazily computed spectrum.
#[derive(Debug)]
pub struct GridField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for GridField {
    fn clone(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.clone(), spectrum: self.spectrum.clone() }
    }
}

impl GridField {
    pub fn new(grid: Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::config(format!("field has {} samples, grid has {}", values.len(), grid.len())));
        }
        Ok(Self { grid, values, spectrum: OnceLock::new() })
    }

    pub fn from_fn(grid: Arc<TorusGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = grid.coordinates().map(|x| f(&x[..n])).collect();
        Self { grid, values, spectrum: OnceLock::new() }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fourier coefficients, computed on first use.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| self.grid.forward(&self.values))
    }

    /// Multiplies each coefficient by `symbol(|ξ|²)` and transforms back.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> f64) -> GridField {
        let spec: Vec<Complex64> =
            self.spectrum().iter().zip(self.grid.xi_squared()).map(|(c, &k2)| c * symbol(k2)).collect();
        let values = self.grid.inverse(spec.clone());
        let spectrum = OnceLock::new();
        let _ = spectrum.set(spec);
        GridField { grid: self.grid.clone(), values, spectrum }
    }

    /// `(-Δ)^γ` as the multiplier `|ξ|^{2γ}`; the zero mode is mapped to zero.
    pub fn spectral_fractional_laplacian(&self, gamma: f64) -> GridField {
        self.apply_multiplier(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(gamma) })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest boundary value relative to the largest value; measures wrap-around.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.is_boundary(*i))
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        edge / peak
    }

    /// Value at the node nearest to `x`.
    pub fn sample_nearest(&self, x: &[f64]) -> f64 {
        let h = self.grid.spacing();
        let np = self.grid.points();
        let mut idx = 0;
        for &xi in x {
            let j = ((xi + self.grid.half_extent()) / h).round() as i64;
            idx = idx * np + j.rem_euclid(np as i64) as usize;
        }
        self.values[idx]
    }
}
