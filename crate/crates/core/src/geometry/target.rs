use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{dot, ManifoldSpec};
use crate::error::{Error, Result};

/// Lipschitz target functions on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetFunction {
    /// Tent in the circle angle `φ ∈ (0, 2π]`: rises as `2λφ/π` to `2λ` at
    /// `φ = π`, then falls back to 0. Defined on the circle only.
    Triangular { lambda: f64 },
    /// `f(x) = x[axis]`, 1-Lipschitz.
    Coordinate { axis: usize },
    /// `f(x) = λ·(x · p)` with `p = (1, …, 1)/√d`.
    CosineOfAngleToFixedPoint { lambda: f64 },
    Constant { value: f64 },
}

impl TargetFunction {
    pub fn lipschitz(&self) -> f64 {
        match *self {
            TargetFunction::Triangular { lambda } => lambda,
            TargetFunction::Coordinate { .. } => 1.0,
            TargetFunction::CosineOfAngleToFixedPoint { lambda } => lambda,
            TargetFunction::Constant { .. } => 0.0,
        }
    }

    /// Checks that the target is defined everywhere on `manifold`.
    pub fn validate_on(&self, manifold: &ManifoldSpec) -> Result<()> {
        match *self {
            TargetFunction::Triangular { lambda } | TargetFunction::CosineOfAngleToFixedPoint { lambda }
                if !(lambda > 0.0 && lambda.is_finite()) =>
            {
                Err(Error::param(format!("lipschitz constant must be > 0, got {lambda}")))
            }
            TargetFunction::Triangular { .. } => match manifold.shape {
                super::ManifoldShape::Circle { .. } => Ok(()),
                _ => Err(Error::Domain("triangular target is defined on the circle only".into())),
            },
            TargetFunction::Coordinate { axis } if axis >= manifold.ambient_dim() => Err(Error::param(
                format!("axis {axis} out of range for d = {}", manifold.ambient_dim()),
            )),
            TargetFunction::Constant { value } if !value.is_finite() => {
                Err(Error::param("constant target must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Circle angle of `x` in `(0, 2π]`.
pub(crate) fn circle_angle(x: &[f64]) -> f64 {
    let a = x[1].atan2(x[0]);
    if a <= 0.0 {
        a + TAU
    } else {
        a
    }
}

pub fn evaluate_target(f: &TargetFunction, x: &[f64]) -> Result<f64> {
    match *f {
        TargetFunction::Triangular { lambda } => {
            if x.len() < 3 || !ManifoldSpec::circle(x.len()).contains(x, 1e-9) {
                return Err(Error::Domain("triangular target evaluated off the circle".into()));
            }
            let phi = circle_angle(x);
            let v = if phi <= PI { phi } else { TAU - phi };
            Ok(2.0 * lambda * v / PI)
        }
        TargetFunction::Coordinate { axis } => x.get(axis).copied().ok_or(Error::Shape {
            expected: axis + 1,
            got: x.len(),
        }),
        TargetFunction::CosineOfAngleToFixedPoint { lambda } => {
            let p = vec![1.0 / (x.len() as f64).sqrt(); x.len()];
            Ok(lambda * dot(x, &p))
        }
        TargetFunction::Constant { value } => Ok(value),
    }
}
