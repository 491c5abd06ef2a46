//! `lpcdf` command-line front end.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 on runtime errors
//! (printed as `error[<code>]: <message>`). `rate-bench` also exits 1
//! when any replicate failed, after writing its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lpcdf::harness::{
    emit_report, run_rate_experiment, ExperimentConfig, ModeSelection, ModelSource,
};
use lpcdf::io::{
    read_dataset_csv, read_json, sha256_file, write_dataset_csv, write_json, DataRef,
    EstimatorManifest, LIBRARY_VERSION, SCHEMA_VERSION,
};
use lpcdf::{
    bandwidth_for, default_threshold, degree_for, mc_risk, sample, CdfEstimator, Error, ModelSpec,
    MultiIndexBasis, RandomSource, Result, RiskMode,
};
use serde::Serialize;

/// Environment variable overriding the worker-thread count.
const WORKERS_ENV: &str = "LPCDF_WORKERS";

#[derive(Parser)]
#[command(
    name = "lpcdf",
    version,
    about = "Local-polynomial conditional CDF estimation and sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset from a built-in or JSON-specified model.
    GenData {
        /// Built-in model name or path to a model spec JSON file.
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Covariate dimension (built-in models only).
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an estimator and write its manifest.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Polynomial degree; defaults to ceil(beta) - 1.
        #[arg(long)]
        ell: Option<usize>,
        /// Bandwidth; defaults to n^(-1/(2 beta + d)).
        #[arg(long)]
        h: Option<f64>,
        /// Eigenvalue threshold; defaults to p_lower * lambda1(D) / 2.
        #[arg(long)]
        threshold: Option<f64>,
        /// Covariate density lower bound used by the default threshold.
        #[arg(long, default_value_t = 1.0)]
        p_lower: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw from the estimated conditional law at one point.
    Sample {
        #[arg(long)]
        est: PathBuf,
        /// Query point, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        at: Vec<f64>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "samples.csv")]
        out: PathBuf,
    },
    /// Monte-Carlo W1 risk of a fitted estimator against a model.
    Risk {
        #[arg(long)]
        est: PathBuf,
        /// Built-in model name or path to a model spec JSON file.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 200)]
        x_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Raw)]
        mode: ModeArg,
        #[arg(long, default_value = "risk.json")]
        out: PathBuf,
    },
    /// Run a rate experiment and write report.json, risks.csv and rate.svg.
    RateBench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        x_reps: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<SelectionArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Repaired,
}

impl From<ModeArg> for RiskMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Raw => RiskMode::Raw,
            ModeArg::Repaired => RiskMode::Repaired,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Raw,
    Repaired,
    Both,
}

impl From<SelectionArg> for ModeSelection {
    fn from(m: SelectionArg) -> Self {
        match m {
            SelectionArg::Raw => ModeSelection::Raw,
            SelectionArg::Repaired => ModeSelection::Repaired,
            SelectionArg::Both => ModeSelection::Both,
        }
    }
}

#[derive(Serialize)]
struct OutputRef {
    path: String,
    sha256: String,
}

/// Sidecar written by every command: what ran, with which resolved
/// settings, and what it produced.
#[derive(Serialize)]
struct RunManifest<C: Serialize> {
    schema: u32,
    kind: &'static str,
    library_version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: C,
    outputs: Vec<OutputRef>,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest<C: Serialize>(
    path: &Path,
    command: &'static str,
    seed: Option<u64>,
    config: C,
    outputs: &[&Path],
) -> Result<()> {
    let outputs = outputs
        .iter()
        .map(|p| {
            Ok(OutputRef {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<_>>()?;
    let manifest = RunManifest {
        schema: SCHEMA_VERSION,
        kind: "lpcdf-run",
        library_version: LIBRARY_VERSION,
        command,
        seed,
        config,
        outputs,
    };
    write_json(path, &manifest)
}

fn load_model_spec(arg: &str, d: usize) -> Result<ModelSpec> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let spec: ModelSpec = read_json(path)?;
        if spec.d != d {
            return Err(Error::InvalidConfig(format!(
                "model spec has d = {}, expected {d}",
                spec.d
            )));
        }
        Ok(spec)
    } else {
        ModelSpec::named(arg, d)
    }
}

fn load_estimator(path: &Path) -> Result<(EstimatorManifest, CdfEstimator<f64>)> {
    let manifest: EstimatorManifest = read_json(path)?;
    let est = manifest.load_estimator(path)?;
    Ok((manifest, est))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn gen_data(model: &str, n: usize, seed: u64, d: usize, out: &Path) -> Result<()> {
    let spec = load_model_spec(model, d)?;
    let law = lpcdf::gaussian_model(spec.clone())?;
    let data = law.sample_dataset(n, &mut RandomSource::new(seed).substream(&[0]))?;
    ensure_parent(out)?;
    write_dataset_csv(out, &data)?;
    #[derive(Serialize)]
    struct Config {
        model: ModelSpec,
        n: usize,
        d: usize,
    }
    write_manifest(
        &sidecar_path(out),
        "gen-data",
        Some(seed),
        Config { model: spec, n, d },
        &[out],
    )
}

struct FitArgs {
    beta: f64,
    ell: Option<usize>,
    h: Option<f64>,
    threshold: Option<f64>,
    p_lower: f64,
}

fn fit(data_path: &Path, args: FitArgs, out: &Path) -> Result<()> {
    let data = read_dataset_csv(data_path)?;
    let (n, d) = (data.n(), data.dim());
    let ell = args.ell.unwrap_or_else(|| degree_for(args.beta));
    let h = args.h.unwrap_or_else(|| bandwidth_for(n, args.beta, d));
    let threshold = match args.threshold {
        Some(t) => t,
        None => default_threshold(&MultiIndexBasis::<f64>::new(d, ell)?, args.p_lower)?,
    };
    let est = CdfEstimator::fit(data, ell, h, threshold)?.with_beta(args.beta);
    let data_ref = DataRef {
        path: data_path.display().to_string(),
        sha256: sha256_file(data_path)?,
        n,
        d,
    };
    let p_lower = args.threshold.is_none().then_some(args.p_lower);
    ensure_parent(out)?;
    write_json(out, &EstimatorManifest::new(data_ref, &est, p_lower))
}

fn sample_cmd(est_path: &Path, at: &[f64], k: usize, seed: u64, out: &Path) -> Result<()> {
    let (_, est) = load_estimator(est_path)?;
    let d = est.data().dim();
    if at.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: at.len(),
        });
    }
    let draws = sample(&est, at, &mut RandomSource::new(seed).substream(&[0]), k)?;
    let mut text = String::new();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    text.push_str(&header.join(","));
    text.push_str(",y_hat\n");
    let prefix: Vec<String> = at.iter().map(|&v| lpcdf::io::fmt17(v)).collect();
    let prefix = prefix.join(",");
    for y in draws {
        text.push_str(&prefix);
        text.push(',');
        text.push_str(&lpcdf::io::fmt17(y));
        text.push('\n');
    }
    ensure_parent(out)?;
    fs::write(out, text)?;
    #[derive(Serialize)]
    struct Config<'a> {
        estimator: String,
        at: &'a [f64],
        k: usize,
    }
    let config = Config {
        estimator: est_path.display().to_string(),
        at,
        k,
    };
    write_manifest(&sidecar_path(out), "sample", Some(seed), config, &[out])
}

fn risk_cmd(
    est_path: &Path,
    model: &str,
    x_reps: usize,
    seed: u64,
    mode: RiskMode,
    out: &Path,
) -> Result<()> {
    let (_, est) = load_estimator(est_path)?;
    let spec = load_model_spec(model, est.data().dim())?;
    let law = lpcdf::gaussian_model(spec.clone())?;
    let estimate = mc_risk(
        &law,
        &est,
        &mut RandomSource::new(seed).substream(&[0]),
        x_reps,
        mode,
    )?;
    ensure_parent(out)?;
    write_json(out, &estimate)?;
    #[derive(Serialize)]
    struct Config {
        estimator: String,
        model: ModelSpec,
        x_reps: usize,
        mode: RiskMode,
    }
    let config = Config {
        estimator: est_path.display().to_string(),
        model: spec,
        x_reps,
        mode,
    };
    write_manifest(&sidecar_path(out), "risk", Some(seed), config, &[out])
}

struct Overrides {
    seed: Option<u64>,
    reps: Option<usize>,
    x_reps: Option<usize>,
    mode: Option<ModeSelection>,
}

/// Returns the number of failed replicates.
fn rate_bench(config: &Path, out: &Path, overrides: Overrides) -> Result<usize> {
    let mut cfg: ExperimentConfig = read_json(config)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = overrides.reps {
        cfg.reps = reps;
    }
    if let Some(x_reps) = overrides.x_reps {
        cfg.x_reps = x_reps;
    }
    if let Some(mode) = overrides.mode {
        cfg.mode = mode;
    }
    if let ModelSource::Named(name) = &cfg.model {
        if name.ends_with(".json") {
            let base = config.parent().unwrap_or(Path::new("."));
            let spec: ModelSpec = read_json(&base.join(name))?;
            cfg.model = ModelSource::Spec(spec);
        }
    }
    let report = run_rate_experiment(&cfg)?;
    let written = emit_report(&report, out)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.failure_messages {
        eprintln!("failed: {f}");
    }
    let outputs: Vec<&Path> = written
        .iter()
        .map(PathBuf::as_path)
        .filter(|p| p.file_name().is_some_and(|n| n != "timing.json"))
        .collect();
    write_manifest(
        &out.join("manifest.json"),
        "rate-bench",
        Some(report.config.seed),
        &report.config,
        &outputs,
    )?;
    eprintln!(
        "wrote {} ({:.1} s)",
        out.display(),
        report.wall_clock_seconds
    );
    Ok(report.failures)
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().ok().filter(|&w| w > 0).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "{WORKERS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_workers()?;
    match cli.command {
        Command::GenData {
            model,
            n,
            seed,
            d,
            out,
        } => gen_data(&model, n, seed, d, &out)?,
        Command::Fit {
            data,
            beta,
            ell,
            h,
            threshold,
            p_lower,
            out,
        } => fit(
            &data,
            FitArgs {
                beta,
                ell,
                h,
                threshold,
                p_lower,
            },
            &out,
        )?,
        Command::Sample {
            est,
            at,
            k,
            seed,
            out,
        } => sample_cmd(&est, &at, k, seed, &out)?,
        Command::Risk {
            est,
            model,
            x_reps,
            seed,
            mode,
            out,
        } => risk_cmd(&est, &model, x_reps, seed, mode.into(), &out)?,
        Command::RateBench {
            config,
            out,
            seed,
            reps,
            x_reps,
            mode,
        } => {
            let overrides = Overrides {
                seed,
                reps,
                x_reps,
                mode: mode.map(Into::into),
            };
            if rate_bench(&config, &out, overrides)? > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
