use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_slope, median};
use crate::config::{Scheme, UsageConfig};
use crate::encoder::{calibrate_thresholds, Encoder, ExpansionMatrix, Sparsifier};
use crate::error::{Error, Result};
use crate::geometry::{sample_input, ManifoldSpec};
use crate::rng::{derive_seed, stream};

const PROBE_BLOCK: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageProfile {
    pub per_unit_fire_count: Vec<u64>,
    pub ever_used_count: usize,
    pub probe_size: usize,
}

impl UsageProfile {
    pub fn min_fire_count(&self) -> u64 {
        self.per_unit_fire_count.iter().copied().min().unwrap_or(0)
    }
}

/// Fire counts of every unit over `probe_size` draws from `manifold`.
pub fn run_usage_probe(encoder: &Encoder, manifold: &ManifoldSpec, probe_size: usize, seed: u64) -> Result<UsageProfile> {
    if probe_size < 10_000 {
        return Err(Error::param(format!("probe_size must be >= 10^4, got {probe_size}")));
    }
    let xs = sample_input(manifold, seed, probe_size)?;
    let mut counts = vec![0u64; encoder.m()];
    for block in xs.chunks(PROBE_BLOCK) {
        for code in encoder.encode_batch(block)? {
            for &j in code.active() {
                counts[j as usize] += 1;
            }
        }
    }
    let ever_used_count = counts.iter().filter(|&&c| c > 0).count();
    Ok(UsageProfile {
        per_unit_fire_count: counts,
        ever_used_count,
        probe_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageTrial {
    pub m: usize,
    pub trial: usize,
    pub k: usize,
    pub ever_used_count: usize,
    pub min_fire_count: u64,
    pub theta_seed: u64,
    pub calibration_seed: u64,
    pub probe_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsagePoint {
    pub m: usize,
    pub k: usize,
    /// Median over trials.
    pub ever_used_count: f64,
    pub used_fraction: f64,
    /// Smallest per-unit fire count seen in any trial.
    pub min_fire_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageScaling {
    pub label: String,
    pub master_seed: u64,
    pub probe_size: usize,
    pub points: Vec<UsagePoint>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub fit_error: Option<String>,
    pub trials: Vec<UsageTrial>,
}

fn usage_trial(cfg: &UsageConfig, m: usize, trial: usize) -> Result<UsageTrial> {
    let k = cfg.k_for(m);
    let s = |tag| derive_seed(cfg.master_seed, &[m as u64, trial as u64, tag]);
    let (theta_seed, calibration_seed, probe_seed) = (s(stream::THETA), s(stream::CALIBRATION), s(stream::PROBE));
    let theta = ExpansionMatrix::build(cfg.dist_spec(), m, theta_seed)?;
    let sparsifier = match cfg.scheme {
        Scheme::Wta => Sparsifier::Wta { k },
        Scheme::Threshold => {
            let n_cal = cfg.n_cal.resolve(m, k);
            Sparsifier::Threshold(calibrate_thresholds(&theta, &cfg.manifold, k, n_cal, calibration_seed)?)
        }
    };
    let encoder = Encoder::new(theta, sparsifier)?;
    let profile = run_usage_probe(&encoder, &cfg.manifold, cfg.probe_size, probe_seed)?;
    Ok(UsageTrial {
        m,
        trial,
        k,
        ever_used_count: profile.ever_used_count,
        min_fire_count: profile.min_fire_count(),
        theta_seed,
        calibration_seed,
        probe_seed,
    })
}

/// Ever-used unit counts across the grid and their log-log slope against `m`.
pub fn usage_scaling(cfg: &UsageConfig) -> Result<UsageScaling> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(m, t)| usage_trial(cfg, m, t))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<UsagePoint> = cfg
        .m_grid
        .iter()
        .map(|&m| {
            let rows: Vec<&UsageTrial> = trials.iter().filter(|t| t.m == m).collect();
            let used = median(&rows.iter().map(|t| t.ever_used_count as f64).collect::<Vec<_>>());
            UsagePoint {
                m,
                k: cfg.k_for(m),
                ever_used_count: used,
                used_fraction: used / m as f64,
                min_fire_count: rows.iter().map(|t| t.min_fire_count).min().unwrap_or(0),
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.m as f64, p.ever_used_count)).collect();
    let (fitted_slope, slope_stderr, fit_error) = if pts.len() < 3 {
        (None, None, Some(format!("need at least 3 grid points, got {}", pts.len())))
    } else {
        match fit_slope(&pts) {
            Ok(f) => (Some(f.slope), Some(f.stderr), None),
            Err(e) => (None, None, Some(e.to_string())),
        }
    };
    Ok(UsageScaling {
        label: cfg.label.clone(),
        master_seed: cfg.master_seed,
        probe_size: cfg.probe_size,
        points,
        fitted_slope,
        slope_stderr,
        fit_error,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DistributionSpec;

    #[test]
    fn k_equals_m_uses_every_unit() {
        let theta = ExpansionMatrix::build(DistributionSpec::UniformSphere { dim: 4 }, 32, 3).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Wta { k: 32 }).unwrap();
        let p = run_usage_probe(&enc, &ManifoldSpec::circle(4), 10_000, 1).unwrap();
        assert_eq!(p.ever_used_count, 32);
        assert!(p.per_unit_fire_count.iter().all(|&c| c == 10_000));
    }

    #[test]
    fn full_sphere_inputs_reach_every_cell() {
        let theta = ExpansionMatrix::build(DistributionSpec::UniformSphere { dim: 3 }, 64, 4).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Wta { k: 1 }).unwrap();
        let small = run_usage_probe(&enc, &ManifoldSpec::full_sphere(3), 10_000, 2).unwrap();
        let big = run_usage_probe(&enc, &ManifoldSpec::full_sphere(3), 200_000, 2).unwrap();
        assert!(big.ever_used_count >= small.ever_used_count);
        assert_eq!(big.ever_used_count, 64);
    }

    #[test]
    fn circle_inputs_use_few_units() {
        let theta = ExpansionMatrix::build(DistributionSpec::UniformSphere { dim: 8 }, 1 << 14, 5).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Wta { k: 1 }).unwrap();
        let p = run_usage_probe(&enc, &ManifoldSpec::circle(8), 20_000, 6).unwrap();
        assert!((p.ever_used_count as f64) / ((1 << 14) as f64) < 0.05, "{}", p.ever_used_count);
    }

    #[test]
    fn calibrated_thresholds_use_every_unit() {
        let m = 256;
        let k = 8;
        let manifold = ManifoldSpec::circle(5);
        let theta = ExpansionMatrix::build(DistributionSpec::UniformSphere { dim: 5 }, m, 7).unwrap();
        let tau = calibrate_thresholds(&theta, &manifold, k, 100 * m / k, 8).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Threshold(tau)).unwrap();
        let p = run_usage_probe(&enc, &manifold, 50_000, 9).unwrap();
        assert_eq!(p.ever_used_count, m);
    }

    #[test]
    fn small_probe_is_rejected() {
        let theta = ExpansionMatrix::build(DistributionSpec::UniformSphere { dim: 3 }, 8, 4).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Wta { k: 1 }).unwrap();
        assert!(run_usage_probe(&enc, &ManifoldSpec::full_sphere(3), 100, 1).is_err());
    }
}
