//! The expand-and-sparsify transform.
//!
//! An input `x ∈ S^{d-1}` is expanded to `y = Θx ∈ ℝ^m` and then reduced to
//! a binary code by one of two sparsifiers:
//!
//! * k-winner-take-all keeps the `k` largest entries of `y` (lowest index
//!   wins ties), so every code has exactly `k` ones;
//! * k-thresholding fires unit `j` when `y_j ≥ τ_j`, where `τ_j` is set so
//!   that unit fires on a `k/m` fraction of inputs. Codes are `k`-sparse in
//!   expectation and may be empty.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sample_expansion_rows, sample_input, DistributionSpec, ManifoldSpec, UnitVector};

/// The `m × d` random matrix `Θ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionMatrix {
    rows: Vec<f64>,
    m: usize,
    d: usize,
    dist: DistributionSpec,
    seed: u64,
}

impl ExpansionMatrix {
    /// Draws `m` rows from `dist`, reproducibly from `seed`.
    pub fn build(dist: DistributionSpec, m: usize, seed: u64) -> Result<Self> {
        let rows = sample_expansion_rows(&dist, m, seed)?;
        Self::from_rows(rows, dist, seed)
    }

    /// Wraps explicit rows. `dist` and `seed` are kept as metadata only.
    pub fn from_rows(rows: Vec<Vec<f64>>, dist: DistributionSpec, seed: u64) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::param("expansion matrix needs at least one row"));
        }
        let d = dist.dim();
        let mut flat = Vec::with_capacity(m * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::Shape {
                    expected: d,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("expansion rows must be finite"));
            }
            flat.extend_from_slice(row);
        }
        Ok(ExpansionMatrix {
            rows: flat,
            m,
            d,
            dist,
            seed,
        })
    }

    pub(crate) fn from_flat(rows: Vec<f64>, m: usize, dist: DistributionSpec, seed: u64) -> Result<Self> {
        let d = dist.dim();
        if m == 0 || rows.len() != m * d {
            return Err(Error::Shape {
                expected: m * d,
                got: rows.len(),
            });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("expansion rows must be finite"));
        }
        Ok(ExpansionMatrix { rows, m, d, dist, seed })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dist(&self) -> &DistributionSpec {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.rows.chunks_exact(self.d)
    }

    pub(crate) fn flat(&self) -> &[f64] {
        &self.rows
    }

    /// `y_j = θ_j · x` for every row.
    pub fn expand(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.m];
        self.expand_into(x, &mut y)?;
        Ok(y)
    }

    pub fn expand_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Shape {
                expected: self.d,
                got: x.len(),
            });
        }
        if y.len() != self.m {
            return Err(Error::Shape {
                expected: self.m,
                got: y.len(),
            });
        }
        for (yj, row) in y.iter_mut().zip(self.rows.chunks_exact(self.d)) {
            *yj = dot(row, x);
        }
        Ok(())
    }
}

/// Active units of a binary code, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseCode {
    active: Vec<u32>,
    m: usize,
}

impl SparseCode {
    pub fn new(active: Vec<u32>, m: usize) -> Result<Self> {
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("active indices must be strictly increasing"));
        }
        if active.last().is_some_and(|&j| j as usize >= m) {
            return Err(Error::param(format!("active index out of range for m = {m}")));
        }
        Ok(SparseCode { active, m })
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.active.binary_search(&(j as u32)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<u8> {
        let mut z = vec![0; self.m];
        for &j in &self.active {
            z[j as usize] = 1;
        }
        z
    }
}

/// Heap entry ordered so that the *weakest* winner sits on top.
#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    index: u32,
}

impl Candidate {
    /// Larger value wins; equal values go to the lower index.
    fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value || (self.value == other.value && self.index < other.index)
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        if other.beats(self) {
            Ordering::Greater
        } else if self.beats(other) {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

/// Indices of the `k` largest entries of `y`, lowest index first among equal
/// values. Single pass with a size-`k` heap of current winners.
pub fn sparsify_kwta(y: &[f64], k: usize) -> Result<SparseCode> {
    let m = y.len();
    if k == 0 || k > m {
        return Err(Error::param(format!("k = {k} outside [1, m = {m}]")));
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::param("NaN in expansion output"));
    }
    Ok(top_k(y, k))
}

fn top_k(y: &[f64], k: usize) -> SparseCode {
    let m = y.len();
    if k == m {
        return SparseCode {
            active: (0..m as u32).collect(),
            m,
        };
    }
    if k == 1 {
        let mut best = Candidate { value: y[0], index: 0 };
        for (j, &v) in y.iter().enumerate().skip(1) {
            let c = Candidate { value: v, index: j as u32 };
            if c.beats(&best) {
                best = c;
            }
        }
        return SparseCode {
            active: vec![best.index],
            m,
        };
    }
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
    for (j, &v) in y.iter().enumerate() {
        let c = Candidate { value: v, index: j as u32 };
        if heap.len() < k {
            heap.push(c);
        } else if c.beats(heap.peek().expect("heap holds k entries")) {
            heap.pop();
            heap.push(c);
        }
    }
    let mut active: Vec<u32> = heap.into_iter().map(|c| c.index).collect();
    active.sort_unstable();
    SparseCode { active, m }
}

/// Per-unit firing thresholds calibrated to rate `k/m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector {
    tau: Vec<f64>,
    target_rate: f64,
    calibration_sample_size: usize,
}

impl ThresholdVector {
    pub fn new(tau: Vec<f64>, target_rate: f64, calibration_sample_size: usize) -> Result<Self> {
        if tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("thresholds must be finite"));
        }
        if !(target_rate > 0.0 && target_rate <= 1.0) {
            return Err(Error::param(format!("target rate {target_rate} outside (0, 1]")));
        }
        Ok(ThresholdVector {
            tau,
            target_rate,
            calibration_sample_size,
        })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    pub fn calibration_sample_size(&self) -> usize {
        self.calibration_sample_size
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// `{j : y_j ≥ τ_j}`; may be empty.
pub fn sparsify_threshold(y: &[f64], tau: &ThresholdVector) -> Result<SparseCode> {
    if y.len() != tau.len() {
        return Err(Error::Shape {
            expected: tau.len(),
            got: y.len(),
        });
    }
    Ok(threshold_code(y, &tau.tau))
}

fn threshold_code(y: &[f64], tau: &[f64]) -> SparseCode {
    let active = y
        .iter()
        .zip(tau)
        .enumerate()
        .filter(|(_, (v, t))| v >= t)
        .map(|(j, _)| j as u32)
        .collect();
    SparseCode { active, m: y.len() }
}

/// 1-based rank of the calibration order statistic, `⌈(1 − k/m)·n⌉`.
pub fn calibration_rank(m: usize, k: usize, n_cal: usize) -> usize {
    ((m - k) * n_cal).div_ceil(m)
}

/// Sets `τ_j` to the `⌈(1 − k/m)·n_cal⌉`-th smallest of `θ_j · x_i` over
/// `n_cal` draws `x_i` from the uniform measure on `manifold`.
///
/// With `k = m` the rank is zero; `τ_j = −2‖θ_j‖ − 1` is then used, which
/// lies below `θ_j · x` for every unit `x`.
pub fn calibrate_thresholds(
    theta: &ExpansionMatrix,
    manifold: &ManifoldSpec,
    k: usize,
    n_cal: usize,
    seed: u64,
) -> Result<ThresholdVector> {
    let m = theta.m();
    if k == 0 || k > m {
        return Err(Error::param(format!("k = {k} outside [1, m = {m}]")));
    }
    if manifold.ambient_dim() != theta.d() {
        return Err(Error::Shape {
            expected: theta.d(),
            got: manifold.ambient_dim(),
        });
    }
    if n_cal * k < 10 * m {
        return Err(Error::Calibration(format!(
            "n_cal = {n_cal} is below 10·m/k = {:.1}; the k/m quantile is not resolvable",
            10.0 * m as f64 / k as f64
        )));
    }
    let rank = calibration_rank(m, k, n_cal);
    let target_rate = k as f64 / m as f64;
    if rank == 0 {
        let tau = theta.rows().map(|r| -2.0 * norm(r) - 1.0).collect();
        return ThresholdVector::new(tau, target_rate, n_cal);
    }
    let samples: Vec<f64> = sample_input(manifold, seed, n_cal)?
        .into_iter()
        .flat_map(UnitVector::into_inner)
        .collect();
    let d = theta.d();
    let tau = (0..m)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n_cal),
            |vals, j| {
                let row = theta.row(j);
                vals.clear();
                vals.extend(samples.chunks_exact(d).map(|x| dot(row, x)));
                let (_, t, _) = vals.select_nth_unstable_by(rank - 1, |a, b| a.total_cmp(b));
                *t
            },
        )
        .collect();
    ThresholdVector::new(tau, target_rate, n_cal)
}

/// How an expansion is sparsified.
#[derive(Debug, Clone, PartialEq)]
pub enum Sparsifier {
    Wta { k: usize },
    Threshold(ThresholdVector),
}

impl Sparsifier {
    /// Nominal sparsity: exact for WTA, expected for thresholding.
    pub fn k(&self) -> f64 {
        match self {
            Sparsifier::Wta { k } => *k as f64,
            Sparsifier::Threshold(t) => t.target_rate * t.len() as f64,
        }
    }

    pub fn is_wta(&self) -> bool {
        matches!(self, Sparsifier::Wta { .. })
    }
}

/// A fixed `Θ` paired with its sparsifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    theta: ExpansionMatrix,
    sparsifier: Sparsifier,
}

impl Encoder {
    pub fn new(theta: ExpansionMatrix, sparsifier: Sparsifier) -> Result<Self> {
        match &sparsifier {
            Sparsifier::Wta { k } if *k == 0 || *k > theta.m() => {
                return Err(Error::param(format!("k = {k} outside [1, m = {}]", theta.m())));
            }
            Sparsifier::Threshold(t) if t.len() != theta.m() => {
                return Err(Error::Shape {
                    expected: theta.m(),
                    got: t.len(),
                });
            }
            _ => {}
        }
        Ok(Encoder { theta, sparsifier })
    }

    pub fn theta(&self) -> &ExpansionMatrix {
        &self.theta
    }

    pub fn sparsifier(&self) -> &Sparsifier {
        &self.sparsifier
    }

    pub fn m(&self) -> usize {
        self.theta.m()
    }

    pub fn d(&self) -> usize {
        self.theta.d()
    }

    pub fn encode(&self, x: &[f64]) -> Result<SparseCode> {
        let mut y = vec![0.0; self.m()];
        self.encode_with(x, &mut y)
    }

    /// Same as [`Encoder::encode`], reusing `scratch` for `y`.
    pub fn encode_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> Result<SparseCode> {
        scratch.resize(self.m(), 0.0);
        self.theta.expand_into(x, scratch)?;
        Ok(match &self.sparsifier {
            Sparsifier::Wta { k } => top_k(scratch, *k),
            Sparsifier::Threshold(t) => threshold_code(scratch, &t.tau),
        })
    }

    /// Encodes every point; output order follows input order.
    pub fn encode_batch<X: AsRef<[f64]> + Sync>(&self, xs: &[X]) -> Result<Vec<SparseCode>> {
        xs.par_iter()
            .map_init(Vec::new, |scratch, x| self.encode_with(x.as_ref(), scratch))
            .collect()
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        self.as_slice()
    }
}

pub fn build_expansion(dist: DistributionSpec, m: usize, seed: u64) -> Result<ExpansionMatrix> {
    ExpansionMatrix::build(dist, m, seed)
}

pub fn encode(theta: &ExpansionMatrix, sparsifier: &Sparsifier, x: &[f64]) -> Result<SparseCode> {
    let y = theta.expand(x)?;
    match sparsifier {
        Sparsifier::Wta { k } => sparsify_kwta(&y, *k),
        Sparsifier::Threshold(t) => sparsify_threshold(&y, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn sphere(d: usize) -> DistributionSpec {
        DistributionSpec::UniformSphere { dim: d }
    }

    #[test]
    fn build_is_deterministic() {
        let a = ExpansionMatrix::build(sphere(3), 4, 7).unwrap();
        let b = ExpansionMatrix::build(sphere(3), 4, 7).unwrap();
        assert_eq!(a, b);
        for r in a.rows() {
            assert!((norm(r) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_frobenius_scale() {
        let sigma = 0.5;
        let t = ExpansionMatrix::build(DistributionSpec::Gaussian { dim: 8, sigma }, 10_000, 5).unwrap();
        let fro2: f64 = t.flat().iter().map(|v| v * v).sum();
        let per = fro2 / (10_000.0 * 8.0);
        assert!(per >= 0.9 * sigma * sigma && per <= 1.1 * sigma * sigma, "{per}");
    }

    #[test]
    fn expand_identity_rows() {
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]];
        let t = ExpansionMatrix::from_rows(rows, sphere(4), 0).unwrap();
        let y = t.expand(&[0.1, -0.7, 0.5, 0.49]).unwrap();
        assert_eq!(y, vec![0.1, -0.7, 0.5]);
    }

    #[test]
    fn expand_matches_naive_loop() {
        let t = ExpansionMatrix::build(DistributionSpec::Gaussian { dim: 7, sigma: 1.3 }, 50, 9).unwrap();
        let x = sample_input(&ManifoldSpec::full_sphere(7), 1, 1).unwrap().remove(0);
        let y = t.expand(&x).unwrap();
        for j in 0..50 {
            let mut s = 0.0;
            for i in 0..7 {
                s += t.row(j)[i] * x[i];
            }
            assert!((y[j] - s).abs() <= 1e-12);
        }
        for v in ExpansionMatrix::build(sphere(7), 50, 2).unwrap().expand(&x).unwrap() {
            assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn expand_shape_error() {
        let t = ExpansionMatrix::build(sphere(3), 4, 7).unwrap();
        assert!(matches!(t.expand(&[1.0, 0.0]), Err(Error::Shape { expected: 3, got: 2 })));
    }

    #[test]
    fn kwta_examples() {
        assert_eq!(sparsify_kwta(&[0.5, -0.2, 0.9], 1).unwrap().active(), &[2]);
        assert_eq!(sparsify_kwta(&[3.0, 1.0, 2.0, 2.0], 2).unwrap().active(), &[0, 2]);
        assert_eq!(sparsify_kwta(&[2.0, 2.0, 2.0, 2.0], 3).unwrap().active(), &[0, 1, 2]);
        assert_eq!(sparsify_kwta(&[0.0, -0.0, 0.0], 1).unwrap().active(), &[0]);
        assert_eq!(sparsify_kwta(&[-0.0, 0.0, 0.0], 2).unwrap().active(), &[0, 1]);
        assert!(sparsify_kwta(&[1.0], 0).is_err());
        assert!(sparsify_kwta(&[1.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn kwta_is_scale_invariant(y in prop::collection::vec(-10.0f64..10.0, 1..60), k in 1usize..60, c in 1e-3f64..1e3) {
            let k = k.min(y.len());
            let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
            let a = sparsify_kwta(&y, k).unwrap();
            prop_assert_eq!(a.len(), k);
            prop_assert_eq!(a, sparsify_kwta(&scaled, k).unwrap());
        }

        #[test]
        fn kwta_matches_full_sort(y in prop::collection::vec(-3i32..3, 1..40), k in 1usize..40) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let k = k.min(y.len());
            let mut idx: Vec<usize> = (0..y.len()).collect();
            idx.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
            let mut want: Vec<u32> = idx[..k].iter().map(|&j| j as u32).collect();
            want.sort_unstable();
            let got = sparsify_kwta(&y, k).unwrap();
            prop_assert_eq!(got.active(), &want[..]);
        }

        #[test]
        fn raising_a_threshold_only_removes(y in prop::collection::vec(-1.0f64..1.0, 2..30), bump in 0.0f64..1.0, pick in 0usize..30) {
            let m = y.len();
            let j = pick % m;
            let tau = ThresholdVector::new(vec![0.0; m], 0.5, 10).unwrap();
            let mut raised = tau.tau().to_vec();
            raised[j] += bump;
            let raised = ThresholdVector::new(raised, 0.5, 10).unwrap();
            let before = sparsify_threshold(&y, &tau).unwrap();
            let after = sparsify_threshold(&y, &raised).unwrap();
            for &i in after.active() {
                prop_assert!(before.contains(i as usize));
            }
            for &i in before.active() {
                if i as usize != j {
                    prop_assert!(after.contains(i as usize));
                }
            }
        }
    }

    #[test]
    fn threshold_examples() {
        let tau = ThresholdVector::new(vec![0.5, 0.5], 0.5, 10).unwrap();
        assert_eq!(sparsify_threshold(&[0.9, 0.1], &tau).unwrap().active(), &[0]);
        assert_eq!(sparsify_threshold(&[0.5, 0.4999], &tau).unwrap().active(), &[0]);
        assert!(sparsify_threshold(&[0.9], &tau).is_err());
        assert!(ThresholdVector::new(vec![f64::NEG_INFINITY], 0.5, 10).is_err());
    }

    #[test]
    fn calibration_rank_arithmetic() {
        assert_eq!(calibration_rank(4, 1, 100), 75);
        assert_eq!(calibration_rank(512, 16, 3200), 3100);
        assert_eq!(calibration_rank(3, 1, 10), 7);
        assert_eq!(calibration_rank(8, 8, 80), 0);
    }

    #[test]
    fn circle_quantile_converges_to_cos_quarter_pi() {
        // Under uniform angle φ, Pr(cos φ ≥ τ) = arccos(τ)/π; rate 1/4 gives τ = cos(π/4).
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]; 4];
        let theta = ExpansionMatrix::from_rows(rows, sphere(5), 0).unwrap();
        let tau = calibrate_thresholds(&theta, &ManifoldSpec::circle(5), 1, 200_000, 3).unwrap();
        for &t in tau.tau() {
            assert!((t - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.005, "{t}");
        }
    }

    #[test]
    fn full_rate_fires_everything() {
        let m = 6;
        let theta = ExpansionMatrix::build(DistributionSpec::Gaussian { dim: 4, sigma: 2.0 }, m, 1).unwrap();
        let manifold = ManifoldSpec::full_sphere(4);
        let tau = calibrate_thresholds(&theta, &manifold, m, 60, 2).unwrap();
        let enc = Encoder::new(theta, Sparsifier::Threshold(tau)).unwrap();
        for x in sample_input(&manifold, 3, 1000).unwrap() {
            assert_eq!(enc.encode(&x).unwrap().len(), m);
        }
    }

    #[test]
    fn calibration_needs_enough_samples() {
        let theta = ExpansionMatrix::build(sphere(3), 100, 1).unwrap();
        let r = calibrate_thresholds(&theta, &ManifoldSpec::full_sphere(3), 10, 99, 2);
        assert!(matches!(r, Err(Error::Calibration(_))));
        assert!(calibrate_thresholds(&theta, &ManifoldSpec::full_sphere(3), 10, 100, 2).is_ok());
    }

    #[test]
    fn recalibration_moves_thresholds_by_root_n() {
        let theta = ExpansionMatrix::build(DistributionSpec::Gaussian { dim: 4, sigma: 1.0 }, 64, 4).unwrap();
        let manifold = ManifoldSpec::circle(4);
        let spread = |n_cal: usize| {
            let a = calibrate_thresholds(&theta, &manifold, 8, n_cal, 10).unwrap();
            let b = calibrate_thresholds(&theta, &manifold, 8, n_cal, 11).unwrap();
            let diffs: Vec<f64> = a.tau().iter().zip(b.tau()).map(|(x, y)| (x - y).abs()).collect();
            diffs.iter().sum::<f64>() / diffs.len() as f64
        };
        let coarse = spread(2_000);
        let fine = spread(32_000);
        // 16× the samples should shrink fluctuations about 4×.
        let ratio = coarse / fine;
        assert!((2.0..8.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn encode_examples() {
        let theta = ExpansionMatrix::build(sphere(6), 40, 8).unwrap();
        let wta = Sparsifier::Wta { k: 5 };
        let mut rng = seeded_rng(4);
        for _ in 0..50 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x3: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
            let z = encode(&theta, &wta, &x).unwrap();
            assert_eq!(z, encode(&theta, &wta, &x3).unwrap());
            assert_eq!(z, sparsify_kwta(&theta.expand(&x).unwrap(), 5).unwrap());
            let enc = Encoder::new(theta.clone(), wta.clone()).unwrap();
            assert_eq!(z, enc.encode(&x).unwrap());
        }
        let all = encode(&theta, &Sparsifier::Wta { k: 40 }, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(all.len(), 40);
    }

    #[test]
    fn encoder_rejects_bad_k() {
        let theta = ExpansionMatrix::build(sphere(3), 4, 7).unwrap();
        assert!(Encoder::new(theta.clone(), Sparsifier::Wta { k: 5 }).is_err());
        assert!(Encoder::new(theta, Sparsifier::Wta { k: 0 }).is_err());
    }

    #[test]
    fn sparse_code_validation() {
        assert!(SparseCode::new(vec![1, 1], 4).is_err());
        assert!(SparseCode::new(vec![2, 1], 4).is_err());
        assert!(SparseCode::new(vec![4], 4).is_err());
        let z = SparseCode::new(vec![0, 3], 4).unwrap();
        assert_eq!(z.to_dense(), vec![1, 0, 0, 1]);
    }
}
