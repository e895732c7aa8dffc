//! Scaling experiments: rate sweeps, unit-usage probes, and log-log slope fits.

mod fit;
mod sweep;
mod usage;

pub use fit::{fit_slope, median, SlopeFit};
pub use sweep::{
    build_encoder, evaluate_model, run_rate_sweep, run_trial, train_model, GridPoint, JobSeeds, MonotonicityAudit, ScalingResult, TrialRecord,
    MAX_NON_COVERED,
};
pub use usage::{run_usage_probe, usage_scaling, UsagePoint, UsageProfile, UsageScaling, UsageTrial};
