//! Command-line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::approximator::ErrorSummary;
use crate::config::{self, ConfigFile, ExperimentConfig};
use crate::encoder::{Encoder, Sparsifier};
use crate::error::{Error, Result};
use crate::metrics::{build_encoder, evaluate_model, run_rate_sweep, train_model, usage_scaling, JobSeeds};
use crate::oracle::{default_suite, run_check, Check};
use crate::persist;
use crate::report;

/// Exit code when a run completes but a check or `--strict` audit fails.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit code for usage, config, input, and I/O errors.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sparsecode", version, about = "Expand-and-sparsify codes and scaling experiments")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SPARSECODE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode CSV vectors with a saved encoder or model.
    Encode(EncodeArgs),
    /// Build (and for thresholds, calibrate) one encoder from a sweep entry.
    Calibrate(JobArgs),
    /// Build, train, and test one model from a sweep entry.
    Learn(JobArgs),
    /// Run every `[[sweep]]` in a config and write CSV/JSON artifacts.
    Sweep(SweepArgs),
    /// Run every `[[usage]]` in a config and write CSV/JSON artifacts.
    Usage(RunArgs),
    /// Compare closed-form sphere measures with Monte Carlo.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Encoder or model container.
    #[arg(long)]
    pub encoder: PathBuf,
    /// CSV of input vectors, one per row, no header.
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file path, or the name of a bundled config.
    #[arg(long)]
    pub config: String,
    /// Override the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Exit non-zero if any grid point is flagged invalid.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct JobArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Sweep label within the config.
    #[arg(long)]
    pub label: String,
    /// Number of units.
    #[arg(long)]
    pub m: usize,
    /// Trial index used for seed derivation.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Checks such as "cap_measure d=6 r=0.3"; the standard suite when omitted.
    pub checks: Vec<String>,
}

pub fn load_config(spec: &str, seed: Option<u64>) -> Result<ConfigFile> {
    let path = Path::new(spec);
    let cfg = if path.exists() {
        ConfigFile::load(path)?
    } else if let Some(cfg) = config::bundled(spec) {
        cfg?
    } else {
        return Err(Error::config(
            "--config",
            format!("`{spec}` is neither a file nor a bundled config"),
        ));
    };
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn find_sweep<'a>(cfg: &'a ConfigFile, label: &str) -> Result<&'a ExperimentConfig> {
    cfg.sweep
        .iter()
        .find(|s| s.label == label)
        .ok_or_else(|| Error::config("--label", format!("no sweep labelled `{label}` in `{}`", cfg.name)))
}

/// Parses rows of `d` comma-separated numbers. Blank lines are errors; a
/// trailing newline is not.
pub fn read_vectors(text: &str, d: usize) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .map(|(i, raw)| {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::Input {
                    line,
                    reason: "empty row".into(),
                });
            }
            let row = raw
                .split(',')
                .map(|v| match v.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(Error::Input {
                        line,
                        reason: format!("`{}` is not a finite number", v.trim()),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != d {
                return Err(Error::Input {
                    line,
                    reason: format!("expected {d} values, got {}", row.len()),
                });
            }
            Ok(row)
        })
        .collect()
}

/// One line per input: the sorted active indices, comma-separated.
pub fn encode_csv(encoder: &Encoder, rows: &[Vec<f64>]) -> Result<String> {
    let codes = encoder.encode_batch(rows)?;
    let mut out = String::new();
    for code in codes {
        let line: Vec<String> = code.active().iter().map(u32::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cmd_encode(args: &EncodeArgs) -> Result<u8> {
    let artifact = persist::load(&args.encoder)?;
    let encoder = artifact.encoder();
    let rows = read_vectors(&std::fs::read_to_string(&args.input)?, encoder.d())?;
    let out = encode_csv(encoder, &rows)?;
    match &args.output {
        Some(p) => std::fs::write(p, out)?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(0)
}

fn job_stem(cfg: &ConfigFile, args: &JobArgs) -> String {
    format!("{}_{}_m{}_t{}", cfg.name, args.label, args.m, args.trial)
}

fn check_job(sweep: &ExperimentConfig, m: usize) -> Result<()> {
    let k = sweep.k_for(m);
    if m == 0 || k > m {
        return Err(Error::config("--m", format!("k = {k} outside [1, m = {m}]")));
    }
    Ok(())
}

fn cmd_calibrate(args: &JobArgs) -> Result<u8> {
    let cfg = load_config(&args.run.config, args.run.seed)?;
    let sweep = find_sweep(&cfg, &args.label)?;
    check_job(sweep, args.m)?;
    let seeds = JobSeeds::derive(cfg.master_seed, args.m, args.trial);
    let (encoder, good, n_cal) = build_encoder(sweep, args.m, &seeds)?;
    std::fs::create_dir_all(&args.run.out)?;
    let path = args.run.out.join(format!("{}.easp", job_stem(&cfg, args)));
    persist::save_encoder(&path, &encoder)?;
    let kind = match encoder.sparsifier() {
        Sparsifier::Wta { k } => format!("wta k={k}"),
        Sparsifier::Threshold(t) => format!("threshold rate={} n_cal={}", t.target_rate(), n_cal.unwrap_or(0)),
    };
    println!(
        "wrote {} (m={}, d={}, {kind}, good units {})",
        path.display(),
        encoder.m(),
        encoder.d(),
        good.iter().filter(|&&g| g).count()
    );
    Ok(0)
}

fn cmd_learn(args: &JobArgs) -> Result<u8> {
    let cfg = load_config(&args.run.config, args.run.seed)?;
    let sweep = find_sweep(&cfg, &args.label)?;
    check_job(sweep, args.m)?;
    let seeds = JobSeeds::derive(cfg.master_seed, args.m, args.trial);
    let (encoder, good, _) = build_encoder(sweep, args.m, &seeds)?;
    let model = train_model(sweep, encoder, good, &seeds)?;
    let (summary, diam): (ErrorSummary, f64) = evaluate_model(sweep, &model, &seeds)?;
    std::fs::create_dir_all(&args.run.out)?;
    let stem = job_stem(&cfg, args);
    let model_path = args.run.out.join(format!("{stem}.model.easp"));
    persist::save_model(&model_path, &model)?;
    let json = serde_json::json!({
        "schema_version": report::SCHEMA_VERSION,
        "label": args.label,
        "m": args.m,
        "trial": args.trial,
        "seeds": seeds,
        "errors": summary,
        "max_cell_diam": diam,
        "used_unit_count": model.used_unit_count(),
    });
    let json_path = args.run.out.join(format!("{stem}_learn.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&json).expect("json") + "\n")?;
    println!(
        "wrote {} and {}: sup_err {} mean_err {} non_covered {}",
        model_path.display(),
        json_path.display(),
        summary.sup_abs_err,
        summary.mean_abs_err,
        summary.non_covered_fraction
    );
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let cfg = load_config(&args.run.config, args.run.seed)?;
    if cfg.sweep.is_empty() {
        return Err(Error::config("sweep", format!("`{}` has no [[sweep]] entries", cfg.name)));
    }
    let results = cfg.sweep.iter().map(run_rate_sweep).collect::<Result<Vec<_>>>()?;
    for path in report::write_sweep_artifacts(&args.run.out, &cfg, &results)? {
        println!("wrote {}", path.display());
    }
    let mut invalid = 0;
    for r in &results {
        let slope = r.fitted_slope.map_or("none".to_string(), |s| format!("{s:.4}"));
        let se = r.slope_stderr.map_or("none".to_string(), |s| format!("{s:.4}"));
        println!(
            "{}: slope {slope} (stderr {se}), invalid points {}, inversions {}",
            r.label,
            r.invalid_points(),
            r.monotonicity.inversions
        );
        invalid += r.invalid_points();
    }
    for g in report::sweep_summary(&cfg, &results).gaps {
        println!("gap {} - {}: {:.4}", g.a, g.b, g.gap);
    }
    Ok(if args.strict && invalid > 0 { EXIT_CHECK_FAILED } else { 0 })
}

fn cmd_usage(args: &RunArgs) -> Result<u8> {
    let cfg = load_config(&args.config, args.seed)?;
    if cfg.usage.is_empty() {
        return Err(Error::config("usage", format!("`{}` has no [[usage]] entries", cfg.name)));
    }
    let results = cfg.usage.iter().map(usage_scaling).collect::<Result<Vec<_>>>()?;
    for path in report::write_usage_artifacts(&args.out, &cfg, &results)? {
        println!("wrote {}", path.display());
    }
    for r in &results {
        let slope = r.fitted_slope.map_or("none".to_string(), |s| format!("{s:.4}"));
        let min_fire = r.points.iter().map(|p| p.min_fire_count).min().unwrap_or(0);
        println!("{}: slope {slope}, least-fired unit count {min_fire}", r.label);
    }
    Ok(0)
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8> {
    let checks = if args.checks.is_empty() {
        default_suite()
    } else {
        args.checks.iter().map(|c| c.parse::<Check>()).collect::<Result<Vec<_>>>()?
    };
    let mut failed = 0;
    for check in &checks {
        let rep = run_check(check)?;
        if !rep.pass {
            failed += 1;
        }
        println!("{rep}");
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed > 0 { EXIT_CHECK_FAILED } else { 0 })
}

pub fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::config("--threads", "must be at least 1"));
        }
        // Fails only if the pool was already built, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Usage(a) => cmd_usage(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_vectors() {
        let rows = read_vectors("1, 0, 0\n0,1,0\n", 3).unwrap();
        assert_eq!(rows, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        match read_vectors("1,0,0\n0,1\n", 3) {
            Err(Error::Input { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match read_vectors("1,0,0\n0,1,0\n0,x,1\n", 3) {
            Err(Error::Input { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read_vectors("1,0,0\n\n0,1,0\n", 3) {
            Err(Error::Input { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_vectors("1,0,inf\n", 3), Err(Error::Input { line: 1, .. })));
    }

    #[test]
    fn cli_parses() {
        Cli::try_parse_from(["sparsecode", "sweep", "--config", "thm33_sphere_d3", "--strict", "--out", "x"]).unwrap();
        Cli::try_parse_from(["sparsecode", "--threads", "2", "oracle", "cap_measure d=6 r=0.3"]).unwrap();
        assert!(Cli::try_parse_from(["sparsecode", "learn", "--config", "c"]).is_err());
    }

    #[test]
    fn unknown_config_is_an_error() {
        assert!(matches!(load_config("no_such_config", None), Err(Error::Config { .. })));
    }
}
