//! Rate experiments: for each sample size draw replicate datasets, fit
//! with `h = n^(-1/(2 beta + d))`, score by Monte-Carlo W1 risk, and fit
//! the log-log slope of mean risk against `n`.
//!
//! Each (grid point, replicate) task owns the substreams
//! `(seed; n_index, rep, 0)` for data and `(seed; n_index, rep, 1)` for
//! covariate draws, and results are reduced in task order, so reports
//! are bitwise identical for any worker count.

mod report;
mod slope;

pub use report::{emit_report, rate_svg, risks_csv};
pub use slope::{fit_loglog_slope, SlopeFit};

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{default_threshold, Dataset};
use crate::error::{Error, Result};
use crate::estimator::{bandwidth_for, degree_for, CdfEstimator, CdfProfiler, SteppedCdf};
use crate::io::{LIBRARY_VERSION, SCHEMA_VERSION};
use crate::multiindex::MultiIndexBasis;
use crate::risk::{discretize, mc_risk_modes, ConditionalLaw, RiskEstimate, RiskMode};
use crate::rng::RandomSource;
use crate::synth::{gaussian_model, ConditionalModel, ModelSpec};

/// Model given by built-in name or full spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Named(String),
    Spec(ModelSpec),
}

impl ModelSource {
    pub fn build(&self, d: usize) -> Result<ConditionalModel> {
        match self {
            ModelSource::Named(name) => ConditionalModel::named(name, d),
            ModelSource::Spec(spec) => {
                if spec.d != d {
                    return Err(Error::InvalidConfig(format!(
                        "model dimension {} differs from config dimension {d}",
                        spec.d
                    )));
                }
                gaussian_model(spec.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ThresholdPolicy {
    Explicit {
        value: f64,
    },
    /// `p_lower * lambda1(D) / 2`; `p_lower` defaults to the model's
    /// covariate density lower bound.
    DensityLowerBound {
        #[serde(default)]
        p_lower: Option<f64>,
    },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::DensityLowerBound { p_lower: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    #[default]
    Raw,
    Repaired,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<RiskMode> {
        match self {
            ModeSelection::Raw => vec![RiskMode::Raw],
            ModeSelection::Repaired => vec![RiskMode::Repaired],
            ModeSelection::Both => vec![RiskMode::Raw, RiskMode::Repaired],
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub model: ModelSource,
    pub d: usize,
    pub beta: f64,
    /// Defaults to `ceil(beta) - 1`.
    #[serde(default)]
    pub ell: Option<usize>,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub x_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub threshold: ThresholdPolicy,
    #[serde(default)]
    pub mode: ModeSelection,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {}", self.schema));
        }
        if self.d < 1 {
            return bad("d must be at least 1".into());
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if let Some(ell) = self.ell {
            if ell != degree_for(self.beta) {
                return bad(format!(
                    "ell = {ell} is inconsistent with beta = {} (expected {})",
                    self.beta,
                    degree_for(self.beta)
                ));
            }
        }
        if self.n_grid.len() < 3 {
            return bad("n_grid needs at least 3 sample sizes".into());
        }
        if self.n_grid[0] < 1 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be positive and strictly increasing".into());
        }
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.x_reps < 2 {
            return bad("x_reps must be at least 2".into());
        }
        if let ThresholdPolicy::Explicit { value } = self.threshold {
            if !(value > 0.0) {
                return bad(format!("threshold must be positive, got {value}"));
            }
        }
        if let ThresholdPolicy::DensityLowerBound { p_lower: Some(p) } = self.threshold {
            if !(p > 0.0) {
                return bad(format!("p_lower must be positive, got {p}"));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.ell.unwrap_or_else(|| degree_for(self.beta))
    }

    /// `-beta / (2 beta + d)`.
    pub fn theoretical_exponent(&self) -> f64 {
        -self.beta / (2.0 * self.beta + self.d as f64)
    }

    fn resolve_threshold(&self, model: &ConditionalModel) -> Result<f64> {
        match self.threshold {
            ThresholdPolicy::Explicit { value } => Ok(value),
            ThresholdPolicy::DensityLowerBound { p_lower } => {
                let p = p_lower.unwrap_or(model.density_bounds().0);
                default_threshold(&MultiIndexBasis::<f64>::new(self.d, self.degree())?, p)
            }
        }
    }
}

/// Tuning handed to the fitter for one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub ell: usize,
    pub h: f64,
    pub threshold: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub h: f64,
    pub threshold: f64,
    pub failures: usize,
    pub risks: BTreeMap<RiskMode, RiskEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub schema: u32,
    pub library_version: String,
    pub config: ExperimentConfig,
    pub theoretical_exponent: f64,
    pub points: Vec<RatePoint>,
    /// `None` where the fit was impossible (e.g. a zero mean risk).
    pub fits: BTreeMap<RiskMode, Option<SlopeFit>>,
    pub failures: usize,
    pub failure_messages: Vec<String>,
    pub warnings: Vec<String>,
    /// Kept out of `report.json` so reports are byte-reproducible.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl RateReport {
    pub fn slope(&self, mode: RiskMode) -> Option<SlopeFit> {
        self.fits.get(&mode).copied().flatten()
    }
}

/// Oracle "estimator" returning the true conditional CDF discretized at
/// equal-mass quantiles.
pub struct OracleEstimator<'a> {
    pub model: &'a ConditionalModel,
    pub atoms: usize,
}

impl CdfProfiler<f64> for OracleEstimator<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn cdf_profile(&self, x: &[f64]) -> Result<SteppedCdf<f64>> {
        Ok(discretize(&self.model.cdf_at(x), self.atoms))
    }
}

/// Runs the experiment with the thresholded local-polynomial estimator.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    run_rate_experiment_with(cfg, |data, p: FitParams| {
        Ok(CdfEstimator::fit(data, p.ell, p.h, p.threshold)?.with_beta(p.beta))
    })
}

/// Runs the experiment with a caller-supplied fitter.
pub fn run_rate_experiment_with<P, F>(cfg: &ExperimentConfig, fitter: F) -> Result<RateReport>
where
    P: CdfProfiler<f64>,
    F: Fn(Dataset<f64>, FitParams) -> Result<P> + Sync,
{
    cfg.validate()?;
    let started = Instant::now();
    let model = cfg.model.build(cfg.d)?;
    let threshold = cfg.resolve_threshold(&model)?;
    let ell = cfg.degree();
    let modes = cfg.mode.modes();
    let source = RandomSource::new(cfg.seed);

    let tasks: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|i| (0..cfg.reps).map(move |r| (i, r)))
        .collect();

    let outcomes: Vec<Result<Vec<f64>>> = tasks
        .par_iter()
        .map(|&(i, r)| {
            let n = cfg.n_grid[i];
            let params = FitParams {
                ell,
                h: bandwidth_for(n, cfg.beta, cfg.d),
                threshold,
                beta: cfg.beta,
            };
            let mut data_rng = source.substream(&[i as u64, r as u64, 0]);
            let mut x_rng = source.substream(&[i as u64, r as u64, 1]);
            let data = model.sample_dataset(n, &mut data_rng)?;
            let est = fitter(data, params)?;
            let risks = mc_risk_modes(&model, &est, &mut x_rng, cfg.x_reps, &modes)?;
            Ok(risks.into_iter().map(|e| e.mean).collect())
        })
        .collect();

    let mut points = Vec::with_capacity(cfg.n_grid.len());
    let mut failure_messages = Vec::new();
    let mut failures = 0;
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let chunk = &outcomes[i * cfg.reps..(i + 1) * cfg.reps];
        let mut per_mode: Vec<Vec<f64>> = vec![Vec::new(); modes.len()];
        let mut point_failures = 0;
        for (r, outcome) in chunk.iter().enumerate() {
            match outcome {
                Ok(values) => {
                    for (slot, &v) in per_mode.iter_mut().zip(values) {
                        slot.push(v);
                    }
                }
                Err(e) => {
                    point_failures += 1;
                    failure_messages.push(format!("n={n} rep={r}: [{}] {e}", e.code()));
                }
            }
        }
        failures += point_failures;
        points.push(RatePoint {
            n,
            h: bandwidth_for(n, cfg.beta, cfg.d),
            threshold,
            failures: point_failures,
            risks: modes
                .iter()
                .zip(per_mode)
                .map(|(&m, v)| (m, RiskEstimate::from_values(v)))
                .collect(),
        });
    }

    let mut warnings = Vec::new();
    let mut fits = BTreeMap::new();
    for &mode in &modes {
        let series: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (p.n as f64, p.risks[&mode].mean))
            .collect();
        for w in series.windows(2) {
            if w[1].1 > w[0].1 {
                warnings.push(format!(
                    "{} risk increased from n={} to n={}",
                    mode.as_str(),
                    w[0].0,
                    w[1].0
                ));
            }
        }
        let fit = match fit_loglog_slope(&series) {
            Ok(f) => Some(f),
            Err(e) => {
                warnings.push(format!("{} slope fit unavailable: {e}", mode.as_str()));
                None
            }
        };
        fits.insert(mode, fit);
    }
    if failures > 0 {
        warnings.push(format!("{failures} replicate(s) failed"));
    }

    let mut config = cfg.clone();
    config.ell = Some(ell);
    Ok(RateReport {
        schema: SCHEMA_VERSION,
        library_version: LIBRARY_VERSION.to_string(),
        config,
        theoretical_exponent: cfg.theoretical_exponent(),
        points,
        fits,
        failures,
        failure_messages,
        warnings,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}
