//! Cell-average linear readout on top of an [`Encoder`].
//!
//! Unit `j` responds on its cell `C_j`. Its weight is the average of the
//! target over the training inputs that land in `C_j`, which is the running
//! mean a Hebbian rule converges to. Under WTA the prediction is
//! `(1/k)·Σ w_j z_j`; under thresholding it is the mean weight of the firing
//! good units.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{Encoder, ExpansionMatrix, SparseCode, Sparsifier};
use crate::error::{Error, Result};
use crate::geometry::{distance, evaluate_target, project_to_manifold, sample_input, ManifoldSpec, TargetFunction, UnitVector};

/// Samples encoded per parallel batch. Accumulation stays sequential in
/// sample order, so results do not depend on the thread count.
const BLOCK: usize = 4096;

/// Which expansion rows may carry a non-zero weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GoodnessCriterion {
    AllGood,
    /// `θ_j` is good iff its distance to the manifold is below half the reach.
    ReachBand { manifold: ManifoldSpec },
}

pub fn classify_good(theta: &ExpansionMatrix, crit: &GoodnessCriterion) -> Vec<bool> {
    match crit {
        GoodnessCriterion::AllGood => vec![true; theta.m()],
        GoodnessCriterion::ReachBand { manifold } => {
            let band = manifold.reach() / 2.0;
            theta
                .rows()
                .map(|row| match project_to_manifold(manifold, row) {
                    Ok(p) => p.delta < band,
                    Err(_) => false,
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximatorModel {
    encoder: Encoder,
    weights: Vec<f64>,
    counts: Vec<u64>,
    good_mask: Vec<bool>,
}

impl ApproximatorModel {
    /// Assembles a model from stored parts, checking the zero-weight invariants.
    pub fn from_parts(encoder: Encoder, weights: Vec<f64>, counts: Vec<u64>, good_mask: Vec<bool>) -> Result<Self> {
        let m = encoder.m();
        for len in [weights.len(), counts.len(), good_mask.len()] {
            if len != m {
                return Err(Error::Shape { expected: m, got: len });
            }
        }
        let bad = (0..m).find(|&j| weights[j] != 0.0 && (!good_mask[j] || counts[j] == 0));
        if let Some(j) = bad {
            return Err(Error::Format(format!(
                "unit {j} has a non-zero weight but is not good or was never trained"
            )));
        }
        Ok(ApproximatorModel {
            encoder,
            weights,
            counts,
            good_mask,
        })
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn good_mask(&self) -> &[bool] {
        &self.good_mask
    }

    /// Units that never fired on the training set.
    pub fn zero_count_units(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&j| self.counts[j] == 0).collect()
    }

    pub fn used_unit_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(self.predict_code(&self.encoder.encode(x)?))
    }

    /// Readout for an already-computed code of this model's encoder.
    pub fn predict_code(&self, code: &SparseCode) -> Prediction {
        match self.encoder.sparsifier() {
            Sparsifier::Wta { k } => {
                let mut sum = 0.0;
                for &j in code.active() {
                    sum += self.weights[j as usize];
                }
                Prediction {
                    value: sum / *k as f64,
                    covered: true,
                }
            }
            Sparsifier::Threshold(_) => {
                let mut sum = 0.0;
                let mut n = 0usize;
                for &j in code.active() {
                    if self.good_mask[j as usize] {
                        sum += self.weights[j as usize];
                        n += 1;
                    }
                }
                if n == 0 {
                    Prediction {
                        value: 0.0,
                        covered: false,
                    }
                } else {
                    Prediction {
                        value: sum / n as f64,
                        covered: true,
                    }
                }
            }
        }
    }
}

/// Draws `n_train` inputs from `manifold` and fits the cell averages of `f`.
pub fn learn_weights(
    encoder: Encoder,
    f: &TargetFunction,
    manifold: &ManifoldSpec,
    n_train: usize,
    seed: u64,
    crit: &GoodnessCriterion,
) -> Result<ApproximatorModel> {
    f.validate_on(manifold)?;
    let xs = sample_input(manifold, seed, n_train)?;
    let ys = xs.iter().map(|x| evaluate_target(f, x)).collect::<Result<Vec<_>>>()?;
    let good = classify_good(encoder.theta(), crit);
    learn_from_samples(encoder, &xs, &ys, good)
}

/// Batch cell averages: `w_j = Σ_{i: z_j(x_i)=1} y_i / count_j` for good
/// units that fired at least once, zero otherwise.
pub fn learn_from_samples(encoder: Encoder, xs: &[UnitVector], ys: &[f64], good_mask: Vec<bool>) -> Result<ApproximatorModel> {
    let m = encoder.m();
    if xs.len() != ys.len() {
        return Err(Error::Shape {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if good_mask.len() != m {
        return Err(Error::Shape {
            expected: m,
            got: good_mask.len(),
        });
    }
    let mut sums = vec![0.0; m];
    let mut counts = vec![0u64; m];
    for (xb, yb) in xs.chunks(BLOCK).zip(ys.chunks(BLOCK)) {
        let codes = encoder.encode_batch(xb)?;
        for (code, &y) in codes.iter().zip(yb) {
            for &j in code.active() {
                sums[j as usize] += y;
                counts[j as usize] += 1;
            }
        }
    }
    let weights = (0..m)
        .map(|j| if good_mask[j] && counts[j] > 0 { sums[j] / counts[j] as f64 } else { 0.0 })
        .collect();
    Ok(ApproximatorModel {
        encoder,
        weights,
        counts,
        good_mask,
    })
}

/// Online form of [`learn_from_samples`]: one pass, each firing unit moves
/// its weight toward the target by `1/count`.
pub fn learn_online(encoder: Encoder, xs: &[UnitVector], ys: &[f64], good_mask: Vec<bool>) -> Result<ApproximatorModel> {
    let m = encoder.m();
    if xs.len() != ys.len() || good_mask.len() != m {
        return Err(Error::Shape {
            expected: m,
            got: good_mask.len(),
        });
    }
    let mut weights = vec![0.0; m];
    let mut counts = vec![0u64; m];
    let mut scratch = Vec::new();
    for (x, &y) in xs.iter().zip(ys) {
        for &j in encoder.encode_with(x, &mut scratch)?.active() {
            let j = j as usize;
            counts[j] += 1;
            weights[j] += (y - weights[j]) / counts[j] as f64;
        }
    }
    for j in 0..m {
        if !good_mask[j] {
            weights[j] = 0.0;
        }
    }
    Ok(ApproximatorModel {
        encoder,
        weights,
        counts,
        good_mask,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub sup_abs_err: f64,
    pub mean_abs_err: f64,
    pub non_covered_fraction: f64,
}

/// Absolute errors over covered points plus the non-covered fraction.
pub fn summarize_errors(predictions: &[Prediction], truth: &[f64]) -> ErrorSummary {
    let mut sup = 0.0f64;
    let mut sum = 0.0;
    let mut covered = 0usize;
    for (p, &t) in predictions.iter().zip(truth) {
        if p.covered {
            let e = (p.value - t).abs();
            sup = sup.max(e);
            sum += e;
            covered += 1;
        }
    }
    ErrorSummary {
        sup_abs_err: sup,
        mean_abs_err: if covered > 0 { sum / covered as f64 } else { 0.0 },
        non_covered_fraction: (predictions.len() - covered) as f64 / predictions.len().max(1) as f64,
    }
}

/// Error of `model` against `f` on `n_test` fresh draws from `manifold`.
pub fn sup_error(model: &ApproximatorModel, f: &TargetFunction, manifold: &ManifoldSpec, n_test: usize, seed: u64) -> Result<ErrorSummary> {
    if n_test < 1000 {
        return Err(Error::param(format!("n_test must be >= 1000, got {n_test}")));
    }
    let xs = sample_input(manifold, seed, n_test)?;
    let truth = xs.iter().map(|x| evaluate_target(f, x)).collect::<Result<Vec<_>>>()?;
    let codes = model.encoder().encode_batch(&xs)?;
    let preds: Vec<Prediction> = codes.par_iter().map(|c| model.predict_code(c)).collect();
    Ok(summarize_errors(&preds, &truth))
}

/// Largest pairwise distance among the points landing in any counted cell.
/// Exact on the landed set, so a lower bound on the true cell diameter.
pub fn max_cell_diameter(xs: &[UnitVector], codes: &[SparseCode], counted: &[bool]) -> f64 {
    let m = counted.len();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (i, code) in codes.iter().enumerate() {
        for &j in code.active() {
            if counted[j as usize] {
                members[j as usize].push(i as u32);
            }
        }
    }
    members
        .par_iter()
        .map(|pts| {
            let mut best = 0.0f64;
            for (a, &i) in pts.iter().enumerate() {
                for &l in &pts[a + 1..] {
                    best = best.max(distance(&xs[i as usize], &xs[l as usize]));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}
