//! Closed-form masses of caps and circle tubes under the uniform measure on
//! `S^{d-1}`, and Beta upper-tail bounds.
//!
//! All of these reduce to upper tails of Beta variables: for `θ` uniform on
//! the sphere, `θ₁² ~ Beta(1/2, (d−1)/2)` and `θ₁² + θ₂² ~ Beta(1, (d−2)/2)`.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete Beta function `I_x(a, b)`.
///
/// Evaluated by the Lentz continued fraction, switching to `1 − I_{1−x}(b, a)`
/// past the mean so the fraction converges quickly.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::param(format!("beta shape parameters must be > 0, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param(format!("incomplete beta argument {x} outside [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - x, b, a)? / b)
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::Domain(format!("incomplete beta did not converge for x={x}, a={a}, b={b}")))
}

/// `Pr(Z ≥ 1 − ε)` for `Z ~ Beta(α, β)`, i.e. `I_ε(β, α)`.
pub fn beta_upper_tail(alpha: f64, beta: f64, eps: f64) -> Result<f64> {
    regularized_incomplete_beta(eps, beta, alpha)
}

/// Exact cap mass together with the polynomial lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMeasure {
    pub exact: f64,
    pub lower_bound: f64,
}

/// Mass of the open ball `B(x, r)` under the uniform measure on `S^{d−1}`,
/// for any `x` on the sphere. Requires `d ≥ 2` and `0 < r < √2`.
///
/// `‖θ − e₁‖ < r` iff `θ₁ > 1 − r²/2`, which has half the probability of
/// `θ₁² > (1 − r²/2)² = 1 − ε` with `ε = r²(1 − r²/4)`.
pub fn cap_measure_exact(d: usize, r: f64) -> Result<CapMeasure> {
    if d < 2 {
        return Err(Error::param(format!("cap measure needs d >= 2, got {d}")));
    }
    if !(r > 0.0 && r < std::f64::consts::SQRT_2) {
        return Err(Error::param(format!("cap radius {r} outside (0, sqrt 2)")));
    }
    let df = d as f64;
    let eps = r * r * (1.0 - r * r / 4.0);
    let exact = 0.5 * beta_upper_tail(0.5, (df - 1.0) / 2.0, eps)?;
    let lower_bound =
        r.powf(df - 1.0) * (1.0 - r * r / 4.0).powf((df - 1.0) / 2.0) / (3.0 * df.sqrt());
    Ok(CapMeasure { exact, lower_bound })
}

/// Mass of `{θ ∈ S^{d−1} : dist(θ, circle) ≤ r}` for the unit circle in the
/// first two coordinates. Requires `d > 3` and `0 < r < 1`.
///
/// The distance condition is `√(θ₁² + θ₂²) ≥ 1 − r²/2`. Both sides are
/// non-negative, so squaring loses nothing and the mass is the full Beta tail
/// `Pr(Beta(1, (d−2)/2) ≥ 1 − ε) = ε^{(d−2)/2}`, with no factor of one half.
pub fn circle_tube_measure(d: usize, r: f64) -> Result<f64> {
    if d <= 3 {
        return Err(Error::param(format!("tube measure needs d > 3, got {d}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param(format!("tube radius {r} outside (0, 1)")));
    }
    let eps = r * r * (1.0 - r * r / 4.0);
    Ok(eps.powf((d as f64 - 2.0) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaTail {
    pub lower: f64,
    pub upper: f64,
    /// `ε^β`, present only when `α = 1` and the two bounds coincide.
    pub exact_if_alpha1: Option<f64>,
}

/// Bounds on `Pr(Z ≥ 1 − ε)` for `Z ~ Beta(α, β)`, `α ≤ 1 ≤ β`:
/// `ε^β / (β·B(α, β))` below and the same times `(1 − ε)^{α−1}` above.
pub fn beta_tail(alpha: f64, beta: f64, eps: f64) -> Result<BetaTail> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be >= 1, got {beta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("eps must be in (0, 1), got {eps}")));
    }
    if alpha == 1.0 {
        let exact = eps.powf(beta);
        return Ok(BetaTail {
            lower: exact,
            upper: exact,
            exact_if_alpha1: Some(exact),
        });
    }
    let lower = (beta * eps.ln() - beta.ln() - ln_beta(alpha, beta)).exp();
    let upper = lower * (1.0 - eps).powf(alpha - 1.0);
    Ok(BetaTail {
        lower,
        upper,
        exact_if_alpha1: None,
    })
}
