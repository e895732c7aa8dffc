//! Shared helpers for the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng as _;
use sparsecode::approximator::{learn_weights, GoodnessCriterion};
use sparsecode::encoder::{calibrate_thresholds, Encoder, ExpansionMatrix, Sparsifier};
use sparsecode::geometry::{evaluate_target, sample_input, DistributionSpec, ManifoldShape, ManifoldSpec, TargetFunction};
use sparsecode::rng::{derive_seed, seeded_rng};

pub fn naive_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Indices of the k largest entries, ties to the lower index, returned sorted.
pub fn naive_top_k(y: &[f64], k: usize) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
    let mut top: Vec<u32> = idx[..k].iter().map(|&j| j as u32).collect();
    top.sort_unstable();
    top
}

fn naive_good(row: &[f64], manifold: &ManifoldSpec, reach_band: bool) -> bool {
    if !reach_band {
        return true;
    }
    let b = manifold.intrinsic_dim() + 1;
    let mut lead2 = 0.0;
    for v in &row[..b] {
        lead2 += v * v;
    }
    let lead = f64::sqrt(lead2);
    if lead == 0.0 {
        return false;
    }
    let mut d2 = 0.0;
    for (i, v) in row.iter().enumerate() {
        let p = if i < b { v / lead } else { 0.0 };
        d2 += (v - p) * (v - p);
    }
    f64::sqrt(d2) < 0.5 * manifold.reach()
}

#[derive(Debug, Default)]
pub struct EquivalenceReport {
    pub instances: usize,
    pub wta_instances: usize,
    pub threshold_instances: usize,
    pub predictions_checked: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
}

/// Random small instances (d ≤ 4, m ≤ 16, n_train ≤ 500); library learn and
/// predict against a loop-by-loop reference sharing only the sampled data.
pub fn bruteforce_equivalence(n: usize) -> EquivalenceReport {
    let mut rep = EquivalenceReport::default();
    for inst in 0..n {
        let mut rng = seeded_rng(derive_seed(0xB00F, &[inst as u64]));
        let d = rng.random_range(2..=4usize);
        let manifold = match rng.random_range(0..3) {
            1 if d >= 3 => ManifoldSpec::circle(d),
            2 if d >= 3 => ManifoldSpec::sub_sphere(d, d - 2),
            _ => ManifoldSpec::full_sphere(d),
        };
        let dist = match rng.random_range(0..3) {
            0 => DistributionSpec::UniformSphere { dim: d },
            1 => DistributionSpec::Gaussian {
                dim: d,
                sigma: rng.random_range(0.2..1.5),
            },
            _ => DistributionSpec::DataAttuned { manifold },
        };
        let m = rng.random_range(2..=16usize);
        let k = rng.random_range(1..=m);
        let threshold = rng.random_bool(0.5);
        let reach_band = threshold && rng.random_bool(0.5);
        let target = match rng.random_range(0..3) {
            0 => TargetFunction::Coordinate {
                axis: rng.random_range(0..d),
            },
            1 if matches!(manifold.shape, ManifoldShape::Circle { .. }) => TargetFunction::Triangular {
                lambda: rng.random_range(0.5..2.0),
            },
            _ => TargetFunction::CosineOfAngleToFixedPoint {
                lambda: rng.random_range(0.5..2.0),
            },
        };
        let n_train = rng.random_range(1..=500usize);
        let n_cal = (100 * m).div_ceil(k);
        let (s_theta, s_cal, s_train, s_test) = (rng.random(), rng.random(), rng.random(), rng.random());

        // Library.
        let theta = ExpansionMatrix::build(dist, m, s_theta).unwrap();
        let sparsifier = if threshold {
            Sparsifier::Threshold(calibrate_thresholds(&theta, &manifold, k, n_cal, s_cal).unwrap())
        } else {
            Sparsifier::Wta { k }
        };
        let crit = if reach_band {
            GoodnessCriterion::ReachBand { manifold }
        } else {
            GoodnessCriterion::AllGood
        };
        let encoder = Encoder::new(theta.clone(), sparsifier).unwrap();
        let model = learn_weights(encoder, &target, &manifold, n_train, s_train, &crit).unwrap();

        // Reference.
        let rows: Vec<Vec<f64>> = (0..m).map(|j| theta.row(j).to_vec()).collect();
        let tau: Option<Vec<f64>> = threshold.then(|| {
            let cal = sample_input(&manifold, s_cal, n_cal).unwrap();
            let rank = ((m - k) * n_cal + m - 1) / m;
            rows.iter()
                .map(|row| {
                    if rank == 0 {
                        return -2.0 * f64::sqrt(naive_dot(row, row)) - 1.0;
                    }
                    let mut vals: Vec<f64> = cal.iter().map(|x| naive_dot(row, x)).collect();
                    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    vals[rank - 1]
                })
                .collect()
        });
        let code = |x: &[f64]| -> Vec<u32> {
            let y: Vec<f64> = rows.iter().map(|r| naive_dot(r, x)).collect();
            match &tau {
                Some(t) => (0..m).filter(|&j| y[j] >= t[j]).map(|j| j as u32).collect(),
                None => naive_top_k(&y, k),
            }
        };
        let good: Vec<bool> = rows.iter().map(|r| naive_good(r, &manifold, reach_band)).collect();
        let mut sums = vec![0.0; m];
        let mut counts = vec![0u64; m];
        for x in sample_input(&manifold, s_train, n_train).unwrap() {
            let fx = evaluate_target(&target, &x).unwrap();
            for j in code(&x) {
                sums[j as usize] += fx;
                counts[j as usize] += 1;
            }
        }
        let weights: Vec<f64> = (0..m)
            .map(|j| if good[j] && counts[j] > 0 { sums[j] / counts[j] as f64 } else { 0.0 })
            .collect();

        let mut mismatch = |what: String| {
            rep.mismatches += 1;
            rep.first_mismatch.get_or_insert(format!("instance {inst}: {what}"));
        };
        if model.counts() != &counts[..] {
            mismatch(format!("counts {:?} vs {:?}", model.counts(), counts));
        }
        if model.good_mask() != &good[..] {
            mismatch("good mask".into());
        }
        if model.weights().iter().zip(&weights).any(|(a, b)| a.to_bits() != b.to_bits()) {
            mismatch(format!("weights {:?} vs {:?}", model.weights(), weights));
        }
        for x in sample_input(&manifold, s_test, 200).unwrap() {
            let active = code(&x);
            let (mut sum, mut used) = (0.0, 0usize);
            for &j in &active {
                if !threshold || good[j as usize] {
                    sum += weights[j as usize];
                    used += 1;
                }
            }
            let (value, covered) = match (threshold, used) {
                (false, _) => (sum / k as f64, true),
                (true, 0) => (0.0, false),
                (true, n) => (sum / n as f64, true),
            };
            let p = model.predict(&x).unwrap();
            rep.predictions_checked += 1;
            if p.value.to_bits() != value.to_bits() || p.covered != covered {
                mismatch(format!("prediction {p:?} vs ({value}, {covered})"));
            }
        }
        rep.instances += 1;
        if threshold {
            rep.threshold_instances += 1;
        } else {
            rep.wta_instances += 1;
        }
    }
    rep
}

#[derive(Debug, Default)]
pub struct PropertyReport {
    pub checks: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

/// `n` randomized k-WTA checks, split evenly between exact sparsity, positive
/// scale invariance, lowest-index tie-breaking, and nearest-row equivalence.
pub fn encoder_properties(n: usize, seed: u64) -> PropertyReport {
    use sparsecode::encoder::sparsify_kwta;
    let mut rep = PropertyReport::default();
    let mut rng = seeded_rng(seed);
    let fail = |rep: &mut PropertyReport, msg: String| {
        rep.failures += 1;
        rep.first_failure.get_or_insert(msg);
    };
    for i in 0..n {
        let m = rng.random_range(1..=64usize);
        let k = rng.random_range(1..=m);
        match i % 4 {
            0 => {
                let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let c = sparsify_kwta(&y, k).unwrap();
                if c.len() != k || c.active().windows(2).any(|w| w[0] >= w[1]) {
                    fail(&mut rep, format!("sparsity: m={m} k={k} got {:?}", c.active()));
                }
            }
            1 => {
                let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let s: f64 = rng.random_range(0.01..100.0);
                let scaled: Vec<f64> = y.iter().map(|v| v * s).collect();
                if sparsify_kwta(&y, k).unwrap() != sparsify_kwta(&scaled, k).unwrap() {
                    fail(&mut rep, format!("scale: m={m} k={k} s={s}"));
                }
            }
            2 => {
                // Few distinct values force ties.
                let levels = rng.random_range(1..=4);
                let y: Vec<f64> = (0..m).map(|_| rng.random_range(0..levels) as f64).collect();
                let got = sparsify_kwta(&y, k).unwrap();
                if got.active() != &naive_top_k(&y, k)[..] {
                    fail(&mut rep, format!("ties: y={y:?} k={k} got {:?}", got.active()));
                }
            }
            _ => {
                let d = rng.random_range(2..=6usize);
                let unit = |rng: &mut sparsecode::rng::Rng| {
                    let v: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                    let n = naive_dot(&v, &v).sqrt();
                    v.into_iter().map(|c| c / n).collect::<Vec<f64>>()
                };
                let rows: Vec<Vec<f64>> = (0..m).map(|_| unit(&mut rng)).collect();
                let x = unit(&mut rng);
                let theta = ExpansionMatrix::from_rows(rows.clone(), DistributionSpec::UniformSphere { dim: d }, 0).unwrap();
                let got = Encoder::new(theta, Sparsifier::Wta { k }).unwrap().encode(&x).unwrap();
                let dist = |r: &Vec<f64>| r.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(&mut rng);
                idx.sort_by(|&a, &b| dist(&rows[a]).partial_cmp(&dist(&rows[b])).unwrap().then(a.cmp(&b)));
                let mut want: Vec<u32> = idx[..k].iter().map(|&j| j as u32).collect();
                want.sort_unstable();
                if got.active() != &want[..] {
                    fail(&mut rep, format!("nearest: m={m} k={k} got {:?} want {want:?}", got.active()));
                }
            }
        }
        rep.checks += 1;
    }
    rep
}
