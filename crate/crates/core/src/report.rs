//! CSV and JSON artifacts for sweeps and usage runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::Result;
use crate::metrics::{JobSeeds, MonotonicityAudit, ScalingResult, UsageScaling};

pub const SCHEMA_VERSION: u32 = 1;

pub const GRID_HEADER: &str = "m,k,sup_err,mean_err,non_covered_fraction,used_unit_count,max_cell_diam,valid";
pub const TRIALS_HEADER: &str = "m,trial,k,n_train,n_test,n_cal,good_units,sup_err,mean_err,non_covered_fraction,used_unit_count,max_cell_diam,theta_seed,calibration_seed,train_seed,test_seed";
pub const USAGE_HEADER: &str = "m,k,ever_used_count,used_fraction,min_fire_count";

pub fn grid_csv(res: &ScalingResult) -> String {
    let mut s = format!("{GRID_HEADER}\n");
    for g in &res.grid {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            g.m, g.k, g.sup_err, g.mean_err, g.non_covered_fraction, g.used_unit_count, g.max_cell_diam, g.valid
        )
        .unwrap();
    }
    s
}

pub fn trials_csv(res: &ScalingResult) -> String {
    let mut s = format!("{TRIALS_HEADER}\n");
    for t in &res.trials {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.m,
            t.trial,
            t.k,
            t.n_train,
            t.n_test,
            t.n_cal.map(|n| n.to_string()).unwrap_or_default(),
            t.good_units,
            t.sup_err,
            t.mean_err,
            t.non_covered_fraction,
            t.used_unit_count,
            t.max_cell_diam,
            t.seeds.theta,
            t.seeds.calibration,
            t.seeds.train,
            t.seeds.test
        )
        .unwrap();
    }
    s
}

pub fn usage_csv(res: &UsageScaling) -> String {
    let mut s = format!("{USAGE_HEADER}\n");
    for p in &res.points {
        writeln!(s, "{},{},{},{},{}", p.m, p.k, p.ever_used_count, p.used_fraction, p.min_fire_count).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSeedRecord {
    pub m: usize,
    pub trial: usize,
    #[serde(flatten)]
    pub seeds: JobSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub label: String,
    pub master_seed: u64,
    pub csv: String,
    pub trials_csv: String,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub fit_error: Option<String>,
    pub invalid_points: usize,
    pub monotonicity: MonotonicityAudit,
    pub seeds: Vec<JobSeedRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeGap {
    pub a: String,
    pub b: String,
    /// `slope(a) − slope(b)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub name: String,
    pub seed_derivation: String,
    pub config: ConfigFile,
    pub sweeps: Vec<SweepRecord>,
    pub gaps: Vec<SlopeGap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub label: String,
    pub csv: String,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub fit_error: Option<String>,
    pub probe_size: usize,
    pub trials: Vec<crate::metrics::UsageTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageSummary {
    pub schema_version: u32,
    pub name: String,
    pub seed_derivation: String,
    pub config: ConfigFile,
    pub usage: Vec<UsageRecord>,
}

pub const SEED_DERIVATION: &str = "derive_seed(master_seed + seed_offset, [m, trial, stream]) with stream theta=1, calibration=2, train=3, test=4, probe=5";

fn grid_name(cfg: &ConfigFile, label: &str) -> String {
    format!("{}_{}.csv", cfg.name, label)
}

fn trials_name(cfg: &ConfigFile, label: &str) -> String {
    format!("{}_{}_trials.csv", cfg.name, label)
}

pub fn sweep_summary(cfg: &ConfigFile, results: &[ScalingResult]) -> SweepSummary {
    let sweeps = results
        .iter()
        .map(|r| SweepRecord {
            label: r.label.clone(),
            master_seed: r.master_seed,
            csv: grid_name(cfg, &r.label),
            trials_csv: trials_name(cfg, &r.label),
            fitted_slope: r.fitted_slope,
            slope_stderr: r.slope_stderr,
            fit_error: r.fit_error.clone(),
            invalid_points: r.invalid_points(),
            monotonicity: r.monotonicity.clone(),
            seeds: r
                .trials
                .iter()
                .map(|t| JobSeedRecord {
                    m: t.m,
                    trial: t.trial,
                    seeds: t.seeds,
                })
                .collect(),
        })
        .collect();
    let mut gaps = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            if let (Some(sa), Some(sb)) = (a.fitted_slope, b.fitted_slope) {
                gaps.push(SlopeGap {
                    a: a.label.clone(),
                    b: b.label.clone(),
                    gap: sa - sb,
                });
            }
        }
    }
    SweepSummary {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        seed_derivation: SEED_DERIVATION.into(),
        config: cfg.clone(),
        sweeps,
        gaps,
    }
}

pub fn usage_summary(cfg: &ConfigFile, results: &[UsageScaling]) -> UsageSummary {
    UsageSummary {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        seed_derivation: SEED_DERIVATION.into(),
        config: cfg.clone(),
        usage: results
            .iter()
            .map(|r| UsageRecord {
                label: r.label.clone(),
                csv: format!("{}_{}_usage.csv", cfg.name, r.label),
                fitted_slope: r.fitted_slope,
                slope_stderr: r.slope_stderr,
                fit_error: r.fit_error.clone(),
                probe_size: r.probe_size,
                trials: r.trials.clone(),
            })
            .collect(),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summary serializes");
    s.push('\n');
    s
}

/// Writes grid and trial CSVs plus `<name>_sweep.json`; returns the paths written.
pub fn write_sweep_artifacts(dir: &Path, cfg: &ConfigFile, results: &[ScalingResult]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for r in results {
        for (name, body) in [(grid_name(cfg, &r.label), grid_csv(r)), (trials_name(cfg, &r.label), trials_csv(r))] {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
    }
    let path = dir.join(format!("{}_sweep.json", cfg.name));
    std::fs::write(&path, to_json(&sweep_summary(cfg, results)))?;
    written.push(path);
    Ok(written)
}

/// Writes one usage CSV per entry plus `<name>_usage.json`.
pub fn write_usage_artifacts(dir: &Path, cfg: &ConfigFile, results: &[UsageScaling]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let summary = usage_summary(cfg, results);
    let mut written = Vec::new();
    for (r, rec) in results.iter().zip(&summary.usage) {
        let path = dir.join(&rec.csv);
        std::fs::write(&path, usage_csv(r))?;
        written.push(path);
    }
    let path = dir.join(format!("{}_usage.json", cfg.name));
    std::fs::write(&path, to_json(&summary))?;
    written.push(path);
    Ok(written)
}
