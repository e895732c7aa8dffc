//! Monte Carlo checks of the closed-form sphere measures.
//!
//! A check is written as `name key=value ... [expect VALUE]`, for example
//! `cap_measure d=6 r=0.3` or `beta_tail alpha=1 beta=2 eps=0.5 expect 0.25`.
//! Optional keys `samples` (default 10^6) and `seed` apply to every check.

use std::fmt;

use rand::Rng as _;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::measures::{beta_tail, beta_upper_tail, cap_measure_exact, circle_tube_measure};
use crate::rng::{derive_seed, seeded_rng, Rng};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x0AC1E;
/// Allowed distance between closed form and estimate, in standard errors.
pub const Z_TOL: f64 = 3.0;
/// Allowed distance between closed form and an `expect` value.
pub const EXPECT_TOL: f64 = 1e-10;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    CapMeasure { d: usize, r: f64 },
    TubeMeasure { d: usize, r: f64 },
    BetaTail { alpha: f64, beta: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    pub expect: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CheckKind::CapMeasure { d, r } => write!(f, "cap_measure d={d} r={r}")?,
            CheckKind::TubeMeasure { d, r } => write!(f, "tube_measure d={d} r={r}")?,
            CheckKind::BetaTail { alpha, beta, eps } => write!(f, "beta_tail alpha={alpha} beta={beta} eps={eps}")?,
        }
        if let Some(e) = self.expect {
            write!(f, " expect {e}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let name = tokens.next().ok_or_else(|| Error::param("empty check"))?;
        let mut keys: Vec<(String, String)> = Vec::new();
        let mut expect = None;
        while let Some(tok) = tokens.next() {
            if tok == "expect" {
                let v = tokens.next().ok_or_else(|| Error::param("`expect` needs a value"))?;
                expect = Some(parse_num::<f64>("expect", v)?);
            } else if let Some((k, v)) = tok.split_once('=') {
                if keys.iter().any(|(seen, _)| seen == k) {
                    return Err(Error::param(format!("duplicate key `{k}`")));
                }
                keys.push((k.to_string(), v.to_string()));
            } else {
                return Err(Error::param(format!("expected key=value, got `{tok}`")));
            }
        }
        let mut take = |key: &str| -> Option<String> {
            let i = keys.iter().position(|(k, _)| k == key)?;
            Some(keys.remove(i).1)
        };
        let mut need = |key: &str| take(key).ok_or_else(|| Error::param(format!("`{name}` needs `{key}=`")));
        let kind = match name {
            "cap_measure" => CheckKind::CapMeasure {
                d: parse_num("d", &need("d")?)?,
                r: parse_num("r", &need("r")?)?,
            },
            "tube_measure" => CheckKind::TubeMeasure {
                d: parse_num("d", &need("d")?)?,
                r: parse_num("r", &need("r")?)?,
            },
            "beta_tail" => CheckKind::BetaTail {
                alpha: parse_num("alpha", &need("alpha")?)?,
                beta: parse_num("beta", &need("beta")?)?,
                eps: parse_num("eps", &need("eps")?)?,
            },
            other => {
                return Err(Error::param(format!(
                    "unknown check `{other}`; expected cap_measure, tube_measure or beta_tail"
                )))
            }
        };
        let samples = take("samples").map(|v| parse_num("samples", &v)).transpose()?.unwrap_or(DEFAULT_SAMPLES);
        let seed = take("seed").map(|v| parse_num("seed", &v)).transpose()?.unwrap_or(DEFAULT_SEED);
        if let Some((k, _)) = keys.first() {
            return Err(Error::param(format!("unknown key `{k}` for `{name}`")));
        }
        if samples < 1000 {
            return Err(Error::param("samples must be at least 1000"));
        }
        Ok(Check {
            kind,
            expect,
            samples,
            seed,
        })
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::param(format!("cannot parse `{key}` value `{v}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub closed_form: f64,
    /// Bounds the closed form must sit between, when the check has them.
    pub bounds: Option<(f64, f64)>,
    pub estimate: f64,
    pub stderr: f64,
    /// `|closed_form − estimate| / stderr`.
    pub z: f64,
    pub expect: Option<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: closed form {:.6e}, monte carlo {:.6e} ± {:.1e} (z = {:.2})",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.closed_form,
            self.estimate,
            self.stderr,
            self.z
        )?;
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        Ok(())
    }
}

/// Counts hits of `hit` over `n` draws, split into independently seeded chunks.
fn monte_carlo(n: usize, seed: u64, hit: impl Fn(&mut Rng) -> bool + Sync) -> (f64, f64) {
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_rng(derive_seed(seed, &[c as u64]));
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    // Floor the standard error at one count so zero-hit runs are not infinitely precise.
    let se = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
    (p, se)
}

fn gaussian_point(rng: &mut Rng, d: usize, out: &mut [f64]) {
    for v in out.iter_mut().take(d) {
        *v = rng.sample(StandardNormal);
    }
}

pub fn run_check(check: &Check) -> Result<CheckReport> {
    if let CheckKind::CapMeasure { d, .. } | CheckKind::TubeMeasure { d, .. } = check.kind {
        if d > 64 {
            return Err(Error::param(format!("monte carlo checks support d <= 64, got {d}")));
        }
    }
    let mut notes = Vec::new();
    let (closed_form, bounds, (estimate, stderr)) = match check.kind {
        CheckKind::CapMeasure { d, r } => {
            let cap = cap_measure_exact(d, r)?;
            if cap.lower_bound > cap.exact {
                notes.push(format!("lower bound {:.6e} exceeds exact value", cap.lower_bound));
            }
            // ‖x − e₁‖ < r with x = g/‖g‖.
            let mc = monte_carlo(check.samples, check.seed, |rng| {
                let mut g = [0.0f64; 64];
                gaussian_point(rng, d, &mut g);
                let n = g[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut dist2 = (g[0] / n - 1.0).powi(2);
                for v in &g[1..d] {
                    dist2 += (v / n).powi(2);
                }
                dist2 < r * r
            });
            (cap.exact, Some((cap.lower_bound, 1.0)), mc)
        }
        CheckKind::TubeMeasure { d, r } => {
            let tube = circle_tube_measure(d, r)?;
            // Distance from x to the unit circle in the first two coordinates.
            let mc = monte_carlo(check.samples, check.seed, |rng| {
                let mut g = [0.0f64; 64];
                gaussian_point(rng, d, &mut g);
                let n = g[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
                let lead = (g[0] * g[0] + g[1] * g[1]).sqrt() / n;
                let rest2: f64 = g[2..d].iter().map(|v| (v / n).powi(2)).sum();
                ((1.0 - lead).powi(2) + rest2).sqrt() <= r
            });
            (tube, None, mc)
        }
        CheckKind::BetaTail { alpha, beta, eps } => {
            let bt = beta_tail(alpha, beta, eps)?;
            let exact = match bt.exact_if_alpha1 {
                Some(e) => e,
                None => beta_upper_tail(alpha, beta, eps)?,
            };
            let dist = Beta::new(alpha, beta).map_err(|e| Error::param(e.to_string()))?;
            let mc = monte_carlo(check.samples, check.seed, |rng| dist.sample(rng) >= 1.0 - eps);
            (exact, Some((bt.lower, bt.upper)), mc)
        }
    };
    let z = (closed_form - estimate).abs() / stderr;
    let mut pass = z <= Z_TOL;
    if let Some((lo, hi)) = bounds {
        let slack = 1e-12 * closed_form.abs().max(1e-300);
        if closed_form < lo - slack || closed_form > hi + slack {
            pass = false;
            notes.push(format!("closed form outside bounds [{lo:.6e}, {hi:.6e}]"));
        }
    }
    if let Some(e) = check.expect {
        if (closed_form - e).abs() > EXPECT_TOL * e.abs().max(1.0) {
            pass = false;
            notes.push(format!("expected {e}, closed form gives {closed_form}"));
        }
    }
    if z > Z_TOL {
        notes.push(format!("closed form and estimate differ by more than {Z_TOL} standard errors"));
    }
    Ok(CheckReport {
        check: check.to_string(),
        closed_form,
        bounds,
        estimate,
        stderr,
        z,
        expect: check.expect,
        pass,
        notes,
    })
}

/// The standard suite: caps, tubes and Beta tails across `d ∈ {4, …, 10}`.
pub fn default_suite() -> Vec<Check> {
    let mut specs: Vec<String> = Vec::new();
    for (d, r) in [(4, 0.5), (5, 0.8), (6, 0.3), (7, 1.0), (8, 0.9), (9, 1.2), (10, 1.1)] {
        specs.push(format!("cap_measure d={d} r={r}"));
    }
    for (d, r) in [(4, 0.5), (5, 0.7), (6, 0.6), (8, 0.8), (10, 0.9)] {
        specs.push(format!("tube_measure d={d} r={r}"));
    }
    for d in [4usize, 6, 8, 10] {
        let beta = (d as f64 - 1.0) / 2.0;
        specs.push(format!("beta_tail alpha=0.5 beta={beta} eps=0.4"));
        let beta = (d as f64 - 2.0) / 2.0;
        specs.push(format!("beta_tail alpha=1 beta={beta} eps=0.5"));
    }
    specs.iter().map(|s| s.parse().expect("built-in check parses")).collect()
}
