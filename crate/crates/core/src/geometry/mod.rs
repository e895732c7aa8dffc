//! Input and expansion-row distributions, synthetic manifolds, Lipschitz
//! targets, and closed-form sphere measures.

mod manifold;
pub mod measures;
mod target;

pub use manifold::{project_to_manifold, sample_input, ManifoldShape, ManifoldSpec, Projection, Regularity};
pub use target::{evaluate_target, TargetFunction};

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, Rng};

/// Tolerance on `‖x‖ = 1` accepted by [`UnitVector::new`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// A point on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps coordinates that are already unit length.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Domain(format!("vector norm {n} is not 1")));
        }
        Ok(UnitVector(coords))
    }

    /// Rescales `coords` to unit length.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::DegenerateInput(format!(
                "cannot normalize a vector of norm {n}"
            )));
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(UnitVector(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s.sqrt()
}

/// Distribution `ν` of the rows of the expansion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    UniformSphere { dim: usize },
    Gaussian { dim: usize, sigma: f64 },
    /// Rows drawn from the uniform measure on the input manifold.
    DataAttuned { manifold: ManifoldSpec },
}

impl DistributionSpec {
    pub fn dim(&self) -> usize {
        match *self {
            DistributionSpec::UniformSphere { dim } => dim,
            DistributionSpec::Gaussian { dim, .. } => dim,
            DistributionSpec::DataAttuned { manifold } => manifold.ambient_dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::UniformSphere { dim } | DistributionSpec::Gaussian { dim, .. }
                if dim < 2 =>
            {
                Err(Error::param(format!("row dimension must be >= 2, got {dim}")))
            }
            DistributionSpec::Gaussian { sigma, .. } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::param(format!("gaussian sigma must be > 0, got {sigma}")))
            }
            DistributionSpec::DataAttuned { manifold } => manifold.validate(),
            _ => Ok(()),
        }
    }

    pub(crate) fn sample_row(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        match *self {
            DistributionSpec::UniformSphere { dim } => sphere_block(rng, dim, dim, out),
            DistributionSpec::Gaussian { dim, sigma } => {
                out.extend((0..dim).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)))
            }
            DistributionSpec::DataAttuned { manifold } => manifold.sample_into(rng, out),
        }
    }
}

/// Draws a uniform point of `S^{block-1}` into the first `block` coordinates
/// of a `dim`-vector appended to `out`; the remaining coordinates are zero.
pub(crate) fn sphere_block(rng: &mut Rng, block: usize, dim: usize, out: &mut Vec<f64>) {
    let start = out.len();
    loop {
        out.extend((0..block).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let n = norm(&out[start..]);
        if n > 0.0 {
            out[start..].iter_mut().for_each(|c| *c /= n);
            break;
        }
        out.truncate(start);
    }
    out.resize(start + dim, 0.0);
}

/// `m` i.i.d. rows from `dist`, reproducible from `seed`.
pub fn sample_expansion_rows(dist: &DistributionSpec, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    dist.validate()?;
    if m == 0 {
        return Err(Error::param("m must be >= 1"));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..m)
        .map(|_| {
            let mut row = Vec::with_capacity(dist.dim());
            dist.sample_row(&mut rng, &mut row);
            row
        })
        .collect())
}
