use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least squares of `ln err` on `ln m`, using only points with `err > 0`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(m, e)| m > 0.0 && e > 0.0 && e.is_finite())
        .map(|&(m, e)| (m.ln(), e.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points with err > 0, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all grid sizes are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

/// Median; the mean of the two middle values for even lengths. NaN-free input assumed.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn grid() -> Vec<f64> {
        (8..=14).map(|p| (1u64 << p) as f64).collect()
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = grid().into_iter().map(|m| (m, m.powf(-0.5))).collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn constant_error_has_zero_slope() {
        let pts: Vec<_> = grid().into_iter().map(|m| (m, 0.3)).collect();
        assert!(fit_slope(&pts).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_inverse_law() {
        let mut rng = crate::rng::seeded_rng(8);
        let pts: Vec<_> = grid()
            .into_iter()
            .map(|m| (m, 2.0 / m * (1.0 + 0.05 * (2.0 * rng.random::<f64>() - 1.0))))
            .collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn too_few_positive_points() {
        let pts = [(1.0, 0.0), (2.0, 0.0), (4.0, 1.0), (8.0, 0.5)];
        assert!(matches!(fit_slope(&pts), Err(Error::Fit(_))));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }
}
