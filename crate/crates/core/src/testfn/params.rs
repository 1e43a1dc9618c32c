use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of `u_tt + (-Δ)^σ u + (-Δ)^δ u_t = |u|^p` in `ℝⁿ`, with the data exponent `m`
/// of the small-data space `L^m ∩ L²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub delta: f64,
    pub n: usize,
    pub p: f64,
    #[serde(default = "default_m_data")]
    pub m_data: f64,
}

fn default_m_data() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(sigma: f64, delta: f64, n: usize, p: f64) -> Result<Self> {
        let params = Self { sigma, delta, n, p, m_data: 1.0 };
        params.validate()?;
        Ok(params)
    }

    pub fn with_m_data(mut self, m: f64) -> Result<Self> {
        self.m_data = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        derived_params(self.sigma, self.delta)?;
        if self.n == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::domain(format!("p must be a finite real > 1, got {}", self.p)));
        }
        if !(1.0..2.0).contains(&self.m_data) {
            return Err(Error::domain(format!("m must lie in [1, 2), got {}", self.m_data)));
        }
        Ok(())
    }

    pub fn k_minus(&self) -> f64 {
        self.sigma.min(2.0 * self.delta)
    }

    pub fn k_plus(&self) -> f64 {
        self.sigma.max(2.0 * self.delta)
    }

    /// Time-scale exponent `2σ - k⁻` of the test function `η(t/R^α)`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.sigma - self.k_minus()
    }

    pub fn p_conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Exponent of `R` in the final estimate `∫ u₁ φ_R ≲ R^{-2σp' + n + α}`.
    pub fn contradiction_exponent(&self) -> f64 {
        -2.0 * self.sigma * self.p_conjugate() + self.n as f64 + self.alpha()
    }
}

/// `(k⁻, k⁺, α)` for the given orders.
pub fn derived_params(sigma: f64, delta: f64) -> Result<(f64, f64, f64)> {
    if !(sigma >= 1.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be ≥ 1, got {sigma}")));
    }
    if !(0.0..sigma).contains(&delta) {
        return Err(Error::domain(format!("delta must lie in [0, sigma) = [0, {sigma}), got {delta}")));
    }
    let k_minus = sigma.min(2.0 * delta);
    let k_plus = sigma.max(2.0 * delta);
    Ok((k_minus, k_plus, 2.0 * sigma - k_minus))
}

/// Right end `1 + 2σ/(n - k⁻)` of the blow-up range. Only needs `n > k⁻`; see
/// [`blow_up_range`] for the version that enforces the blow-up hypothesis.
pub fn critical_exponent(params: &ModelParams) -> Result<f64> {
    let gap = params.n as f64 - params.k_minus();
    if gap <= 0.0 {
        return Err(Error::hypothesis(format!(
            "critical exponent needs n > k⁻ (n = {}, k⁻ = {})",
            params.n,
            params.k_minus()
        )));
    }
    Ok(1.0 + 2.0 * params.sigma / gap)
}

/// Open interval of exponents for which small data with positive mass blow up.
pub fn blow_up_range(params: &ModelParams) -> Result<(f64, f64)> {
    let km = params.k_minus();
    if params.n as f64 <= 2.0 * km {
        return Err(Error::hypothesis(format!("blow-up result needs n > 2k⁻ (n = {}, 2k⁻ = {})", params.n, 2.0 * km)));
    }
    Ok((1.0, critical_exponent(params)?))
}

/// Global-existence threshold and the admissible `p` window of the dimension cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceBound {
    /// `1 + m(k⁺+σ)/(n - m k⁻)`; existence requires `p` strictly above this.
    pub threshold: f64,
    /// `[2/m, upper]` with `upper = ∞` when `n ≤ 2k⁺`; `None` when `n` exceeds every case.
    pub window: Option<(f64, f64)>,
}

impl ExistenceBound {
    /// Whether `p` satisfies both the threshold and the window.
    pub fn admits(&self, p: f64) -> bool {
        p > self.threshold && self.window.is_some_and(|(lo, hi)| p >= lo && p <= hi)
    }
}

pub fn existence_exponent_bound(params: &ModelParams) -> Result<ExistenceBound> {
    let m = params.m_data;
    let n = params.n as f64;
    let denom = n - m * params.k_minus();
    if denom <= 0.0 {
        return Err(Error::hypothesis(format!("n - m·k⁻ = {denom} must be positive")));
    }
    let threshold = 1.0 + m * (params.k_plus() + params.sigma) / denom;
    let kp = params.k_plus();
    let window = if n <= 2.0 * kp {
        Some((2.0 / m, f64::INFINITY))
    } else if n <= 4.0 * kp / (2.0 - m) {
        Some((2.0 / m, n / (n - 2.0 * kp)))
    } else {
        None
    };
    Ok(ExistenceBound { threshold, window })
}

/// Time-decay exponents for `‖u‖`, `‖|D|^{k⁺} u‖` and `‖u_t‖` in `L²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayExponents {
    pub solution: f64,
    pub derivative: f64,
    pub velocity: f64,
}

/// Decay exponents of the linear estimates. They depend on `(σ, δ, n, m)` only and do not
/// check any condition on `p`.
pub fn linear_decay_exponents(params: &ModelParams) -> DecayExponents {
    let (km, kp) = (params.k_minus(), params.k_plus());
    let d = kp - params.delta;
    let base = -(params.n as f64) / (2.0 * d) * (1.0 / params.m_data - 0.5);
    DecayExponents {
        solution: base + km / (2.0 * d),
        derivative: base - (kp - km) / (2.0 * d),
        velocity: base - (params.sigma - km) / d,
    }
}

/// Decay exponents of the global small-data solution, after checking the hypotheses on
/// `n`, `m` and `p` under which they hold.
pub fn global_solution_decay_exponents(params: &ModelParams) -> Result<DecayExponents> {
    params.validate()?;
    let m = params.m_data;
    let n = params.n as f64;
    let mut failed = Vec::new();
    if m > 1.0 {
        let m0 = 1.0 / (1.0 / m - 0.5);
        if n <= m0 * params.k_minus() {
            failed.push(format!("n > m₀k⁻ (m₀ = {m0})"));
        }
    }
    match existence_exponent_bound(params) {
        Ok(bound) => {
            if params.p <= bound.threshold {
                failed.push(format!("p > {}", bound.threshold));
            }
            match bound.window {
                None => failed.push(format!("n ≤ 4k⁺/(2-m) = {}", 4.0 * params.k_plus() / (2.0 - m))),
                Some((lo, hi)) => {
                    if params.p < lo || params.p > hi {
                        failed.push(format!("{lo} ≤ p ≤ {hi}"));
                    }
                }
            }
        }
        Err(e) => failed.push(e.to_string()),
    }
    if !failed.is_empty() {
        return Err(Error::hypothesis(format!("failed conditions: {}", failed.join("; "))));
    }
    Ok(linear_decay_exponents(params))
}

/// Exponent of `ε` in the lifespan estimate `T_ε ≲ ε^{e}`.
pub fn lifespan_exponent(params: &ModelParams) -> Result<f64> {
    let km = params.k_minus();
    let denom = 2.0 * params.sigma - (params.n as f64 - km) * (params.p - 1.0);
    if denom <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "p = {} is not below the critical exponent (2σ - (n-k⁻)(p-1) = {denom})",
            params.p
        )));
    }
    Ok(-(2.0 * params.sigma - km) * (params.p - 1.0) / denom)
}

/// `ε^{e}` with the lifespan exponent `e`; the constant is taken to be 1.
pub fn lifespan_bound(epsilon: f64, params: &ModelParams) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    Ok(epsilon.powf(lifespan_exponent(params)?))
}

/// `A^{1/(1-γ)}`, an upper bound for `sup_{y ≥ 0} (A y^γ - y)`.
pub fn young_upper(a: f64, gamma: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("A must be positive, got {a}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(a.powf(1.0 / (1.0 - gamma)))
}
