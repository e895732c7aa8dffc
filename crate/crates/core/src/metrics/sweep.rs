use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_slope, median};
use crate::approximator::{
    classify_good, learn_from_samples, max_cell_diameter, summarize_errors, ApproximatorModel, ErrorSummary, Prediction,
};
use crate::config::{ExperimentConfig, Scheme};
use crate::encoder::{calibrate_thresholds, ExpansionMatrix, Encoder, Sparsifier};
use crate::error::Result;
use crate::geometry::{evaluate_target, sample_input};
use crate::rng::{derive_seed, stream};

/// Non-covered fraction above which a grid point is left out of the slope fit.
pub const MAX_NON_COVERED: f64 = 0.2;

/// Seeds for one (m, trial) job, each derived from `(master_seed, m, trial, stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSeeds {
    pub theta: u64,
    pub calibration: u64,
    pub train: u64,
    pub test: u64,
}

impl JobSeeds {
    pub fn derive(master_seed: u64, m: usize, trial: usize) -> Self {
        let s = |tag| derive_seed(master_seed, &[m as u64, trial as u64, tag]);
        JobSeeds {
            theta: s(stream::THETA),
            calibration: s(stream::CALIBRATION),
            train: s(stream::TRAIN),
            test: s(stream::TEST),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m: usize,
    pub trial: usize,
    pub k: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_cal: Option<usize>,
    pub good_units: usize,
    pub sup_err: f64,
    pub mean_err: f64,
    pub non_covered_fraction: f64,
    pub used_unit_count: usize,
    pub max_cell_diam: f64,
    pub seeds: JobSeeds,
}

/// Per-m medians over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub m: usize,
    pub k: usize,
    pub sup_err: f64,
    pub mean_err: f64,
    pub non_covered_fraction: f64,
    pub used_unit_count: f64,
    pub max_cell_diam: f64,
    /// False when the median non-covered fraction exceeds 20%.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityAudit {
    /// Grid steps where the median sup error went up.
    pub inversions: usize,
    /// More than one inversion.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub label: String,
    pub master_seed: u64,
    pub grid: Vec<GridPoint>,
    pub fitted_slope: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub fit_error: Option<String>,
    pub monotonicity: MonotonicityAudit,
    pub trials: Vec<TrialRecord>,
}

impl ScalingResult {
    pub fn invalid_points(&self) -> usize {
        self.grid.iter().filter(|g| !g.valid).count()
    }
}

/// Builds `Θ` for one job and, for the threshold scheme, calibrates it.
/// Returns the encoder, its goodness mask, and the calibration sample size.
pub fn build_encoder(cfg: &ExperimentConfig, m: usize, seeds: &JobSeeds) -> Result<(Encoder, Vec<bool>, Option<usize>)> {
    let k = cfg.k_for(m);
    let theta = ExpansionMatrix::build(cfg.dist_spec(), m, seeds.theta)?;
    let (sparsifier, n_cal) = match cfg.scheme {
        Scheme::Wta => (Sparsifier::Wta { k }, None),
        Scheme::Threshold => {
            let n_cal = cfg.n_cal.resolve(m, k);
            let tau = calibrate_thresholds(&theta, &cfg.manifold, k, n_cal, seeds.calibration)?;
            (Sparsifier::Threshold(tau), Some(n_cal))
        }
    };
    let good = classify_good(&theta, &cfg.goodness_criterion());
    Ok((Encoder::new(theta, sparsifier)?, good, n_cal))
}

/// Fits cell averages on the job's training draws.
pub fn train_model(cfg: &ExperimentConfig, encoder: Encoder, good: Vec<bool>, seeds: &JobSeeds) -> Result<ApproximatorModel> {
    let n_train = cfg.n_train.resolve(encoder.m(), cfg.k_for(encoder.m()));
    let xs = sample_input(&cfg.manifold, seeds.train, n_train)?;
    let ys = xs.iter().map(|x| evaluate_target(&cfg.target, x)).collect::<Result<Vec<_>>>()?;
    learn_from_samples(encoder, &xs, &ys, good)
}

/// Test-set errors and the largest landed-cell diameter among good units.
pub fn evaluate_model(cfg: &ExperimentConfig, model: &ApproximatorModel, seeds: &JobSeeds) -> Result<(ErrorSummary, f64)> {
    let test = sample_input(&cfg.manifold, seeds.test, cfg.n_test)?;
    let truth = test.iter().map(|x| evaluate_target(&cfg.target, x)).collect::<Result<Vec<_>>>()?;
    let codes = model.encoder().encode_batch(&test)?;
    let preds: Vec<Prediction> = codes.iter().map(|c| model.predict_code(c)).collect();
    let diam = max_cell_diameter(&test, &codes, model.good_mask());
    Ok((summarize_errors(&preds, &truth), diam))
}

/// One full pipeline run: build, calibrate if needed, learn, and test.
pub fn run_trial(cfg: &ExperimentConfig, m: usize, trial: usize) -> Result<TrialRecord> {
    let seeds = JobSeeds::derive(cfg.master_seed, m, trial);
    let (encoder, good, n_cal) = build_encoder(cfg, m, &seeds)?;
    let good_units = good.iter().filter(|&&g| g).count();
    let model = train_model(cfg, encoder, good, &seeds)?;
    let (summary, max_cell_diam) = evaluate_model(cfg, &model, &seeds)?;
    let k = cfg.k_for(m);
    Ok(TrialRecord {
        m,
        trial,
        k,
        n_train: cfg.n_train.resolve(m, k),
        n_test: cfg.n_test,
        n_cal,
        good_units,
        sup_err: summary.sup_abs_err,
        mean_err: summary.mean_abs_err,
        non_covered_fraction: summary.non_covered_fraction,
        used_unit_count: model.used_unit_count(),
        max_cell_diam,
        seeds,
    })
}

/// Runs every (m, trial) job, takes medians per m, and fits the log-log slope.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<ScalingResult> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(m, t)| run_trial(cfg, m, t))
        .collect::<Result<Vec<_>>>()?;

    let grid: Vec<GridPoint> = cfg
        .m_grid
        .iter()
        .map(|&m| {
            let rows: Vec<&TrialRecord> = trials.iter().filter(|r| r.m == m).collect();
            let med = |f: fn(&TrialRecord) -> f64| median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            let non_covered = med(|r| r.non_covered_fraction);
            GridPoint {
                m,
                k: cfg.k_for(m),
                sup_err: med(|r| r.sup_err),
                mean_err: med(|r| r.mean_err),
                non_covered_fraction: non_covered,
                used_unit_count: med(|r| r.used_unit_count as f64),
                max_cell_diam: med(|r| r.max_cell_diam),
                valid: non_covered <= MAX_NON_COVERED,
            }
        })
        .collect();

    let points: Vec<(f64, f64)> = grid.iter().filter(|g| g.valid).map(|g| (g.m as f64, g.sup_err)).collect();
    let (fitted_slope, slope_stderr, fit_error) = match fit_slope(&points) {
        Ok(fit) => (Some(fit.slope), Some(fit.stderr), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let inversions = grid.windows(2).filter(|w| w[1].sup_err > w[0].sup_err).count();

    Ok(ScalingResult {
        label: cfg.label.clone(),
        master_seed: cfg.master_seed,
        grid,
        fitted_slope,
        slope_stderr,
        fit_error,
        monotonicity: MonotonicityAudit {
            inversions,
            flagged: inversions > 1,
        },
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Goodness, KRule, RowDistribution, SampleSize};
    use crate::geometry::{ManifoldSpec, TargetFunction};

    fn small(target: TargetFunction) -> ExperimentConfig {
        ExperimentConfig {
            label: "t".into(),
            manifold: ManifoldSpec::full_sphere(3),
            dist: RowDistribution::UniformSphere,
            scheme: Scheme::Wta,
            goodness: Goodness::AllGood,
            target,
            m_grid: vec![16, 32, 64, 128, 256],
            k_rule: KRule::Fixed(2),
            n_train: SampleSize::PerCell(50.0),
            n_test: 1000,
            n_cal: SampleSize::PerCell(100.0),
            trials: 3,
            seed_offset: 0,
            master_seed: 1,
        }
    }

    #[test]
    fn constant_target_has_no_slope() {
        let res = run_rate_sweep(&small(TargetFunction::Constant { value: 2.0 })).unwrap();
        assert!(res.grid.iter().all(|g| g.sup_err == 0.0));
        assert!(res.fitted_slope.is_none());
        assert!(res.fit_error.is_some());
    }

    #[test]
    fn sweep_shape_and_determinism() {
        let cfg = small(TargetFunction::Coordinate { axis: 0 });
        let a = run_rate_sweep(&cfg).unwrap();
        let b = run_rate_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid.len(), 5);
        assert_eq!(a.trials.len(), 15);
        assert!(a.grid.windows(2).all(|w| w[0].m < w[1].m));
        let slope = a.fitted_slope.unwrap();
        assert!(slope < 0.0, "error should shrink with m, slope {slope}");
    }

    #[test]
    fn threshold_reach_band_sweep_runs() {
        let mut cfg = small(TargetFunction::Coordinate { axis: 0 });
        cfg.manifold = ManifoldSpec::circle(4);
        cfg.dist = RowDistribution::Gaussian { sigma: 0.3 };
        cfg.scheme = Scheme::Threshold;
        cfg.goodness = Goodness::ReachBand;
        let res = run_rate_sweep(&cfg).unwrap();
        assert!(res.trials.iter().all(|t| t.n_cal.is_some() && t.good_units <= t.m));
    }

    #[test]
    fn job_seeds_are_distinct() {
        let a = JobSeeds::derive(7, 256, 0);
        let b = JobSeeds::derive(7, 256, 1);
        let c = JobSeeds::derive(7, 512, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a.theta, a.train);
    }
}
