//! Experiment configuration files.
//!
//! A config file is TOML with a file-level `name` and `master_seed`, then any
//! number of `[[sweep]]` (rate sweeps) and `[[usage]]` (unit-usage scaling)
//! tables. See `configs/` for the bundled reproduction configs.

use serde::{Deserialize, Serialize};

use crate::approximator::GoodnessCriterion;
use crate::error::{Error, Result};
use crate::geometry::{DistributionSpec, ManifoldSpec, TargetFunction};

/// Row distribution as written in a config; dimensions come from the manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowDistribution {
    UniformSphere,
    Gaussian {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    DataAttuned,
}

fn default_sigma() -> f64 {
    1.0
}

impl RowDistribution {
    pub fn resolve(&self, manifold: &ManifoldSpec) -> DistributionSpec {
        let dim = manifold.ambient_dim();
        match *self {
            RowDistribution::UniformSphere => DistributionSpec::UniformSphere { dim },
            RowDistribution::Gaussian { sigma } => DistributionSpec::Gaussian { dim, sigma },
            RowDistribution::DataAttuned => DistributionSpec::DataAttuned { manifold: *manifold },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Wta,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goodness {
    #[default]
    AllGood,
    ReachBand,
}

impl Goodness {
    pub fn resolve(&self, manifold: &ManifoldSpec) -> GoodnessCriterion {
        match self {
            Goodness::AllGood => GoodnessCriterion::AllGood,
            Goodness::ReachBand => GoodnessCriterion::ReachBand { manifold: *manifold },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

/// How `k` is chosen for each grid size `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    Fixed(usize),
    /// `⌈c · (d if ambient_dim) · log_base m⌉`, at least 1.
    Log {
        c: f64,
        base: LogBase,
        #[serde(default)]
        ambient_dim: bool,
    },
    /// `max(⌈d_o/2⌉, 1)`.
    HalfIntrinsic,
}

impl KRule {
    pub fn k(&self, m: usize, manifold: &ManifoldSpec) -> usize {
        match *self {
            KRule::Fixed(k) => k,
            KRule::Log { c, base, ambient_dim } => {
                let log = match base {
                    LogBase::Two => (m as f64).log2(),
                    LogBase::E => (m as f64).ln(),
                };
                let scale = if ambient_dim { manifold.ambient_dim() as f64 } else { 1.0 };
                ((c * scale * log).ceil() as usize).max(1)
            }
            KRule::HalfIntrinsic => manifold.intrinsic_dim().div_ceil(2).max(1),
        }
    }
}

/// A sample count, either fixed or proportional to the expected cell count `m/k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSize {
    Fixed(usize),
    /// `⌈c · m / k⌉`.
    PerCell(f64),
}

impl SampleSize {
    pub fn resolve(&self, m: usize, k: usize) -> usize {
        match *self {
            SampleSize::Fixed(n) => n,
            SampleSize::PerCell(c) => (c * m as f64 / k as f64).ceil() as usize,
        }
    }
}

fn default_n_train() -> SampleSize {
    SampleSize::PerCell(200.0)
}

fn default_n_cal() -> SampleSize {
    SampleSize::PerCell(100.0)
}

fn default_n_test() -> usize {
    20_000
}

fn default_trials() -> usize {
    5
}

fn default_m_grid() -> Vec<usize> {
    (8..=14).map(|p| 1usize << p).collect()
}

/// One rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub label: String,
    pub manifold: ManifoldSpec,
    pub dist: RowDistribution,
    pub scheme: Scheme,
    #[serde(default)]
    pub goodness: Goodness,
    pub target: TargetFunction,
    #[serde(default = "default_m_grid")]
    pub m_grid: Vec<usize>,
    pub k_rule: KRule,
    #[serde(default = "default_n_train")]
    pub n_train: SampleSize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_n_cal")]
    pub n_cal: SampleSize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Added to the file-level seed so sweeps in one file draw independent samples.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed_offset: u64,
    /// File-level seed plus `seed_offset`.
    #[serde(skip)]
    pub master_seed: u64,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ExperimentConfig {
    pub fn dist_spec(&self) -> DistributionSpec {
        self.dist.resolve(&self.manifold)
    }

    pub fn goodness_criterion(&self) -> GoodnessCriterion {
        self.goodness.resolve(&self.manifold)
    }

    pub fn k_for(&self, m: usize) -> usize {
        self.k_rule.k(m, &self.manifold)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("sweep.{}.{f}", self.label);
        self.manifold
            .validate()
            .map_err(|e| Error::config(field("manifold"), e.to_string()))?;
        self.dist_spec()
            .validate()
            .map_err(|e| Error::config(field("dist"), e.to_string()))?;
        self.target
            .validate_on(&self.manifold)
            .map_err(|e| Error::config(field("target"), e.to_string()))?;
        validate_grid(&self.m_grid, 5).map_err(|r| Error::config(field("m_grid"), r))?;
        if self.trials < 3 {
            return Err(Error::config(field("trials"), "need at least 3 trials per grid point"));
        }
        if self.n_test < 1000 {
            return Err(Error::config(field("n_test"), "need at least 1000 test points"));
        }
        for &m in &self.m_grid {
            let k = self.k_for(m);
            if k == 0 || k > m {
                return Err(Error::config(field("k_rule"), format!("k = {k} outside [1, m = {m}]")));
            }
            if self.n_train.resolve(m, k) == 0 {
                return Err(Error::config(field("n_train"), format!("resolves to 0 at m = {m}")));
            }
            if self.scheme == Scheme::Threshold && self.n_cal.resolve(m, k) * k < 10 * m {
                return Err(Error::config(field("n_cal"), format!("below 10·m/k at m = {m}")));
            }
        }
        Ok(())
    }
}

/// One unit-usage scaling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsageConfig {
    pub label: String,
    pub manifold: ManifoldSpec,
    pub dist: RowDistribution,
    pub scheme: Scheme,
    pub k_rule: KRule,
    pub m_grid: Vec<usize>,
    pub probe_size: usize,
    #[serde(default = "default_n_cal")]
    pub n_cal: SampleSize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(skip)]
    pub master_seed: u64,
}

impl UsageConfig {
    pub fn dist_spec(&self) -> DistributionSpec {
        self.dist.resolve(&self.manifold)
    }

    pub fn k_for(&self, m: usize) -> usize {
        self.k_rule.k(m, &self.manifold)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("usage.{}.{f}", self.label);
        self.manifold
            .validate()
            .map_err(|e| Error::config(field("manifold"), e.to_string()))?;
        self.dist_spec()
            .validate()
            .map_err(|e| Error::config(field("dist"), e.to_string()))?;
        validate_grid(&self.m_grid, 1).map_err(|r| Error::config(field("m_grid"), r))?;
        if self.probe_size < 10_000 {
            return Err(Error::config(field("probe_size"), "need at least 10^4 probe points"));
        }
        if self.trials == 0 {
            return Err(Error::config(field("trials"), "need at least one trial"));
        }
        for &m in &self.m_grid {
            let k = self.k_for(m);
            if k == 0 || k > m {
                return Err(Error::config(field("k_rule"), format!("k = {k} outside [1, m = {m}]")));
            }
            if self.scheme == Scheme::Threshold && self.n_cal.resolve(m, k) * k < 10 * m {
                return Err(Error::config(field("n_cal"), format!("below 10·m/k at m = {m}")));
            }
        }
        Ok(())
    }
}

fn validate_grid(grid: &[usize], min_len: usize) -> std::result::Result<(), String> {
    if grid.len() < min_len {
        return Err(format!("need at least {min_len} grid points, got {}", grid.len()));
    }
    if grid.contains(&0) {
        return Err("grid sizes must be positive".into());
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    pub master_seed: u64,
    #[serde(default)]
    pub sweep: Vec<ExperimentConfig>,
    #[serde(default)]
    pub usage: Vec<UsageConfig>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        cfg.propagate_seed();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: ConfigFile = serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))?;
        cfg.propagate_seed();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Replaces the master seed everywhere.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self.propagate_seed();
        self
    }

    fn propagate_seed(&mut self) {
        for s in &mut self.sweep {
            s.master_seed = self.master_seed.wrapping_add(s.seed_offset);
        }
        for u in &mut self.usage {
            u.master_seed = self.master_seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::config("name", "must be non-empty and use only [A-Za-z0-9_-]"));
        }
        if self.sweep.is_empty() && self.usage.is_empty() {
            return Err(Error::config("<file>", "no [[sweep]] or [[usage]] entries"));
        }
        let mut labels: Vec<&str> = self.sweep.iter().map(|s| s.label.as_str()).chain(self.usage.iter().map(|u| u.label.as_str())).collect();
        for l in &labels {
            if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::config("label", format!("`{l}` must use only [A-Za-z0-9_-]")));
            }
        }
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config("label", format!("duplicate label `{}`", w[0])));
        }
        self.sweep.iter().try_for_each(ExperimentConfig::validate)?;
        self.usage.iter().try_for_each(UsageConfig::validate)
    }
}

/// Configs shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("thm33_sphere_d3", include_str!("../configs/thm33_sphere_d3.toml")),
    ("thm34_vs_thm45_circle_d8", include_str!("../configs/thm34_vs_thm45_circle_d8.toml")),
    ("thm51_attuned_circle", include_str!("../configs/thm51_attuned_circle.toml")),
    ("usage_circle_d5", include_str!("../configs/usage_circle_d5.toml")),
];

pub fn bundled(name: &str) -> Option<Result<ConfigFile>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ConfigFile::from_toml(text))
}
