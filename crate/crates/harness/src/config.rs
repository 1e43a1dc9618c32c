//! Experiment configuration: one TOML file with a section per subcommand.

use std::path::{Path, PathBuf};

use fracwave_core::sim::{sha256_hex, GridSpec, SimConfig};
use fracwave_core::testfn::ModelParams;
use serde::{Deserialize, Serialize};

use crate::outcome::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Multiplies every pass/fail tolerance.
    pub tolerance_scale: f64,
    pub verify_lemmas: LemmaConfig,
    pub blowup: BlowupConfig,
    pub lifespan: LifespanConfig,
    pub testfn: TestfnConfig,
    pub decay: DecayConfig,
    pub selftest: SelftestConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            out: None,
            seed: 0,
            workers: None,
            tolerance_scale: 1.0,
            verify_lemmas: LemmaConfig::default(),
            blowup: BlowupConfig::default(),
            lifespan: LifespanConfig::default(),
            testfn: TestfnConfig::default(),
            decay: DecayConfig::default(),
            selftest: SelftestConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Parses a possibly partial file. Every key absent from the file keeps its default,
    /// section by section, so `[lifespan.sim]` with one key inherits the rest of the
    /// lifespan defaults rather than generic ones.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        Self::from_toml_with(text, &[])
    }

    /// Like [`from_toml`](Self::from_toml), then applies `key.path=value` assignments. Values
    /// are parsed as TOML and taken as plain strings when that fails.
    pub fn from_toml_with(text: &str, sets: &[String]) -> Result<Self, HarnessError> {
        let bad = |e: String| HarnessError::Usage(format!("bad config: {e}"));
        let mut user: toml::Table = text.parse().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        for set in sets {
            let (path, raw) = set
                .split_once('=')
                .ok_or_else(|| HarnessError::Usage(format!("--set expects key=value, got {set:?}")))?;
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            let mut nested = value;
            for key in path.trim().rsplit('.') {
                if key.is_empty() {
                    return Err(HarnessError::Usage(format!("bad key path {path:?}")));
                }
                let mut t = toml::Table::new();
                t.insert(key.to_string(), nested);
                nested = toml::Value::Table(t);
            }
            if let toml::Value::Table(t) = nested {
                merge(&mut user, t);
            }
        }
        let mut base = toml::Table::try_from(Self::default()).map_err(|e| bad(e.to_string()))?;
        merge(&mut base, user);
        let cfg: Self = toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return Err(HarnessError::Usage(format!("tolerance_scale must be positive, got {}", self.tolerance_scale)));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Usage("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form. The output directory and the worker count are
    /// excluded: neither changes any result.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.out = None;
        canon.workers = None;
        sha256_hex(serde_json::to_string(&canon).expect("config serialises").as_bytes())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Physical model and torus used by the simulation subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub sigma: f64,
    pub delta: f64,
    pub n: usize,
    pub p: f64,
    pub half_extent: f64,
    pub points: usize,
    pub dt: f64,
    pub t_end: f64,
    pub threshold: f64,
    pub record_interval: f64,
    /// Width of the Gaussian data profile.
    pub width: f64,
}

impl SimSection {
    pub fn params(&self) -> Result<ModelParams, HarnessError> {
        ModelParams::new(self.sigma, self.delta, self.n, self.p).map_err(HarnessError::from)
    }

    pub fn sim_config(&self) -> Result<SimConfig, HarnessError> {
        let grid = GridSpec { n: self.n, half_extent: self.half_extent, points: self.points };
        let mut cfg = SimConfig::new(self.params()?, grid, self.dt, self.t_end);
        cfg.threshold = self.threshold;
        cfg.record_interval = self.record_interval;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One cell of the decay-lemma matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCell {
    pub n: usize,
    pub q: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    /// Explicit matrix; when absent, `dims × orders × weight_offsets` with `q = n + offset`
    /// (clamped below at 0.5).
    pub cells: Option<Vec<LemmaCell>>,
    pub dims: Vec<usize>,
    pub orders: Vec<f64>,
    pub weight_offsets: Vec<f64>,
    pub radii: Vec<f64>,
    pub scales: Vec<f64>,
    /// Negative control: claims one extra power of decay in every majorant.
    pub inject_wrong_majorant: bool,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            cells: None,
            dims: vec![1, 2, 3],
            orders: vec![0.25, 0.75, 1.5],
            weight_offsets: vec![-1.0, 0.0, 1.5],
            radii: (0..9).map(|k| 10f64.powf(1.0 + k as f64 / 4.0)).collect(),
            scales: vec![2.0, 8.0, 32.0],
            inject_wrong_majorant: false,
        }
    }
}

impl LemmaConfig {
    pub fn matrix(&self) -> Vec<LemmaCell> {
        if let Some(cells) = &self.cells {
            return cells.clone();
        }
        let mut out = Vec::new();
        for &n in &self.dims {
            for &gamma in &self.orders {
                for &off in &self.weight_offsets {
                    out.push(LemmaCell { n, q: (n as f64 + off).max(0.5), gamma });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    pub sim: SimSection,
    pub epsilon: f64,
    /// Expected verdict label (`completed`, `blew-up`, `step-collapse`); a mismatch fails.
    pub expect: Option<String>,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            sim: SimSection {
                sigma: 1.0,
                delta: 0.0,
                n: 1,
                p: 2.0,
                half_extent: 256.0,
                points: 4096,
                dt: 0.05,
                t_end: 200.0,
                threshold: 1e3,
                record_interval: 1.0,
                width: 1.0,
            },
            epsilon: 1.0,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifespanConfig {
    pub sim: SimSection,
    pub epsilons: Vec<f64>,
    /// Relative tolerance on the fitted slope against the lifespan exponent.
    pub slope_tolerance: f64,
}

impl Default for LifespanConfig {
    fn default() -> Self {
        Self {
            sim: SimSection {
                sigma: 1.0,
                delta: 0.0,
                n: 1,
                p: 2.0,
                half_extent: 1024.0,
                points: 8192,
                dt: 0.5,
                t_end: 1e5,
                threshold: 1e3,
                record_interval: 10.0,
                width: 1.0,
            },
            epsilons: (3..=7).map(|k| 2f64.powi(-k)).collect(),
            slope_tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestfnPreset {
    /// `u = (1 - e^{-t}) g`: zero displacement, positive velocity.
    Rising,
    /// `u ≡ 0`.
    ZeroData,
    /// `u = (e^{-t} - 1) g`: velocity with negative integral.
    NegativeData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestfnConfig {
    pub preset: TestfnPreset,
    pub sigma: f64,
    pub delta: f64,
    pub n: usize,
    pub p: f64,
    pub scales: Vec<f64>,
    pub half_extent: f64,
    pub points: usize,
    pub dt: f64,
    pub width: f64,
    /// Relative tolerance on the rhs slope.
    pub slope_tolerance: f64,
}

impl Default for TestfnConfig {
    fn default() -> Self {
        Self {
            preset: TestfnPreset::Rising,
            sigma: 1.0,
            delta: 0.2,
            n: 1,
            p: 2.0,
            scales: vec![10.0, 20.0, 40.0, 80.0],
            half_extent: 64.0,
            points: 256,
            dt: 0.5,
            width: 1.0,
            slope_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub sim: SimSection,
    pub window: (f64, f64),
    /// Relative tolerance on the fitted exponents.
    pub tolerance: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            sim: SimSection {
                sigma: 1.0,
                delta: 0.0,
                n: 1,
                p: 2.0,
                half_extent: 2048.0,
                points: 8192,
                dt: 5.0,
                t_end: 1e4,
                threshold: 1e3,
                record_interval: 50.0,
                width: 2.0,
            },
            window: (100.0, 1e4),
            tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    /// Random draws per property.
    pub cases: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { cases: 16 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_stable() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 7\n[lifespan]\nepsilons = [0.125]\n[lifespan.sim]\ndt = 0.25\n")
            .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.lifespan.epsilons, vec![0.125]);
        assert_eq!(cfg.lifespan.sim.dt, 0.25);
        assert_eq!(cfg.lifespan.sim.points, LifespanConfig::default().sim.points);
        assert_ne!(cfg.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn output_directory_and_workers_do_not_change_the_hash() {
        let mut cfg = ExperimentConfig::default();
        let h = cfg.hash();
        cfg.out = Some("/elsewhere".into());
        cfg.workers = Some(3);
        assert_eq!(cfg.hash(), h);
    }

    #[test]
    fn rejects_unknown_and_bad_fields() {
        assert!(ExperimentConfig::from_toml("sede = 1").is_err());
        assert!(ExperimentConfig::from_toml("tolerance_scale = -1.0").is_err());
        assert!(ExperimentConfig::from_toml("workers = 0").is_err());
        assert!(ExperimentConfig::from_toml("[decay.sim]\nwidht = 2.0").is_err());
    }

    #[test]
    fn assignments_override_file_values() {
        let sets = vec!["seed=9".to_string(), "blowup.sim.p=4.0".into(), "blowup.expect=completed".into()];
        let cfg = ExperimentConfig::from_toml_with("seed = 7\n", &sets).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.blowup.sim.p, 4.0);
        assert_eq!(cfg.blowup.expect.as_deref(), Some("completed"));
        assert!(ExperimentConfig::from_toml_with("", &["nokey".into()]).is_err());
        assert!(ExperimentConfig::from_toml_with("", &["blowup.sim.q=1".into()]).is_err());
    }

    #[test]
    fn default_matrix_has_27_cells() {
        let m = LemmaConfig::default().matrix();
        assert_eq!(m.len(), 27);
        assert!(m.iter().all(|c| c.q >= 0.5));
    }
}
