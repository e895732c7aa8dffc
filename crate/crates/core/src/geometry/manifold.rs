use serde::{Deserialize, Serialize};

use super::{distance, norm, sphere_block, UnitVector};
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, Rng};

/// Synthetic input manifolds embedded in `S^{d-1}`. Each one is a unit
/// sphere living in a leading block of coordinates, so the nearest-point
/// projection and the reach are known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldShape {
    /// All of `S^{d-1}`.
    FullSphere { dim: usize },
    /// `{x : x₁² + x₂² = 1, x₃ = … = x_d = 0}`.
    Circle { dim: usize },
    /// The unit `d_o`-sphere in the first `d_o + 1` coordinates.
    SubSphere { dim: usize, intrinsic_dim: usize },
}

/// Almost-uniformity constants `(c₁, c₂, c₃, r_o)`. Carried for
/// documentation only; nothing in the crate computes with them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r_o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    #[serde(flatten)]
    pub shape: ManifoldShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
}

/// Nearest manifold point and the distance to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub pi: UnitVector,
    pub delta: f64,
}

impl From<ManifoldShape> for ManifoldSpec {
    fn from(shape: ManifoldShape) -> Self {
        ManifoldSpec {
            shape,
            regularity: None,
        }
    }
}

impl ManifoldSpec {
    pub fn full_sphere(dim: usize) -> Self {
        ManifoldShape::FullSphere { dim }.into()
    }

    pub fn circle(dim: usize) -> Self {
        ManifoldShape::Circle { dim }.into()
    }

    pub fn sub_sphere(dim: usize, intrinsic_dim: usize) -> Self {
        ManifoldShape::SubSphere { dim, intrinsic_dim }.into()
    }

    pub fn ambient_dim(&self) -> usize {
        match self.shape {
            ManifoldShape::FullSphere { dim }
            | ManifoldShape::Circle { dim }
            | ManifoldShape::SubSphere { dim, .. } => dim,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self.shape {
            ManifoldShape::FullSphere { dim } => dim - 1,
            ManifoldShape::Circle { .. } => 1,
            ManifoldShape::SubSphere { intrinsic_dim, .. } => intrinsic_dim,
        }
    }

    /// Every built-in manifold is a unit sphere in some coordinate block.
    pub fn reach(&self) -> f64 {
        1.0
    }

    /// Number of leading coordinates that can be non-zero.
    fn block(&self) -> usize {
        self.intrinsic_dim() + 1
    }

    pub fn validate(&self) -> Result<()> {
        match self.shape {
            ManifoldShape::FullSphere { dim } if dim < 2 => {
                Err(Error::param(format!("full sphere needs d >= 2, got {dim}")))
            }
            ManifoldShape::Circle { dim } if dim < 3 => {
                Err(Error::param(format!("circle needs d >= 3, got {dim}")))
            }
            ManifoldShape::SubSphere { dim, intrinsic_dim } if intrinsic_dim == 0 || intrinsic_dim >= dim => {
                Err(Error::param(format!(
                    "sub-sphere needs 1 <= d_o < d, got d = {dim}, d_o = {intrinsic_dim}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn sample_into(&self, rng: &mut Rng, out: &mut Vec<f64>) {
        sphere_block(rng, self.block(), self.ambient_dim(), out);
    }

    /// Exact membership test up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.ambient_dim() {
            return false;
        }
        let b = self.block();
        x[b..].iter().all(|c| c.abs() <= tol) && (norm(&x[..b]) - 1.0).abs() <= tol
    }
}

/// `n` i.i.d. draws from the uniform measure on `manifold`.
pub fn sample_input(manifold: &ManifoldSpec, seed: u64, n: usize) -> Result<Vec<UnitVector>> {
    manifold.validate()?;
    if n == 0 {
        return Err(Error::param("sample size must be >= 1"));
    }
    let mut rng = seeded_rng(seed);
    let d = manifold.ambient_dim();
    Ok((0..n)
        .map(|_| {
            let mut v = Vec::with_capacity(d);
            manifold.sample_into(&mut rng, &mut v);
            UnitVector(v)
        })
        .collect())
}

/// Nearest point of `manifold` to `theta`, with `delta = ‖θ − π(θ)‖`.
///
/// Fails when the leading coordinate block of `theta` is zero, where the
/// nearest point is not unique.
pub fn project_to_manifold(manifold: &ManifoldSpec, theta: &[f64]) -> Result<Projection> {
    let d = manifold.ambient_dim();
    if theta.len() != d {
        return Err(Error::Shape {
            expected: d,
            got: theta.len(),
        });
    }
    let b = manifold.block();
    let lead = norm(&theta[..b]);
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "projection undefined: leading {b} coordinates have norm {lead}"
        )));
    }
    let mut pi = vec![0.0; d];
    for (p, t) in pi.iter_mut().zip(&theta[..b]) {
        *p = t / lead;
    }
    let delta = distance(theta, &pi);
    Ok(Projection {
        pi: UnitVector(pi),
        delta,
    })
}
