//! Wasserstein-1 risk between conditional CDFs.
//!
//! In one dimension W1 equals the L1 distance between CDFs. Step-vs-step
//! distances are exact sums over the merged breakpoints. Step-vs-analytic
//! distances are exact per segment: on a segment where the step sits at
//! level `c`, the integrand `|F - c|` changes sign only at `F^-1(c)`, so the
//! segment integral follows from the antiderivative of `F`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{monotone_rearrange, CdfProfiler, StepFunction};
use crate::scalar::Scalar;

const TERMINAL_TOL: f64 = 1e-6;
const BISECTION_TOL: f64 = 1e-10;

/// Continuous CDF with closed-form (or numerically exact) integral.
pub trait AnalyticCdf<T: Scalar> {
    fn cdf(&self, t: T) -> T;

    /// `int_{-inf}^t F(s) ds`.
    fn antiderivative(&self, t: T) -> T;

    /// First moment; links the lower and upper tail integrals.
    fn mean(&self) -> T;

    /// Generalized inverse for `tau` in `(0, 1)`. The default bisects to
    /// `1e-10` inside an expanding bracket around the mean.
    fn inverse_cdf(&self, tau: T) -> T {
        let mut width = T::one();
        let mut lo = self.mean() - width;
        while self.cdf(lo) >= tau && width < T::lit(1e12) {
            width = width * T::lit(2.0);
            lo = self.mean() - width;
        }
        width = T::one();
        let mut hi = self.mean() + width;
        while self.cdf(hi) < tau && width < T::lit(1e12) {
            width = width * T::lit(2.0);
            hi = self.mean() + width;
        }
        let tol = T::lit(BISECTION_TOL);
        while hi - lo > tol * (T::one() + lo.abs().max(hi.abs())) {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= tau {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `int_t^inf (1 - F(s)) ds`.
    fn upper_tail(&self, t: T) -> T {
        self.antiderivative(t) - t + self.mean()
    }
}

/// `N(mu, sigma^2)` CDF with closed-form antiderivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCdf<T> {
    pub mu: T,
    pub sigma: T,
}

impl<T: Scalar> GaussianCdf<T> {
    pub fn new(mu: T, sigma: T) -> Self {
        Self { mu, sigma }
    }

    fn z(&self, t: T) -> f64 {
        ((t - self.mu) / self.sigma).as_f64()
    }
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn std_normal_quantile(tau: f64) -> f64 {
    if tau <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if tau >= 1.0 {
        return f64::INFINITY;
    }
    let z = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * tau);
    // one Newton polish step
    let pdf = std_normal_pdf(z);
    if pdf > 0.0 {
        z - (std_normal_cdf(z) - tau) / pdf
    } else {
        z
    }
}

impl<T: Scalar> AnalyticCdf<T> for GaussianCdf<T> {
    fn cdf(&self, t: T) -> T {
        T::lit(std_normal_cdf(self.z(t)))
    }

    fn antiderivative(&self, t: T) -> T {
        let z = self.z(t);
        self.sigma * T::lit(z * std_normal_cdf(z) + std_normal_pdf(z))
    }

    fn mean(&self) -> T {
        self.mu
    }

    fn inverse_cdf(&self, tau: T) -> T {
        self.mu + self.sigma * T::lit(std_normal_quantile(tau.as_f64()))
    }

    fn upper_tail(&self, t: T) -> T {
        let z = self.z(t);
        self.sigma * T::lit(std_normal_pdf(z) - z * std_normal_cdf(-z))
    }
}

fn check_terminated<T: Scalar>(f: &impl StepFunction<T>) -> Result<()> {
    let level = f.terminal_level();
    if f.jumps().is_empty() || (level - T::one()).abs() > T::lit(TERMINAL_TOL) {
        return Err(Error::UnterminatedCdf {
            level: level.as_f64(),
        });
    }
    Ok(())
}

/// Exact `int |F_a - F_b| dt` for two step CDFs.
pub fn w1_step_vs_step<T: Scalar>(a: &impl StepFunction<T>, b: &impl StepFunction<T>) -> Result<T> {
    check_terminated(a)?;
    check_terminated(b)?;
    let (ja, la) = (a.jumps(), a.levels());
    let (jb, lb) = (b.jumps(), b.levels());
    let (mut i, mut j) = (0, 0);
    let (mut level_a, mut level_b) = (T::zero(), T::zero());
    let mut prev: Option<T> = None;
    let mut total = T::zero();
    while i < ja.len() || j < jb.len() {
        let t = match (ja.get(i), jb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total = total + (level_a - level_b).abs() * (t - p);
        }
        while i < ja.len() && ja[i] == t {
            level_a = la[i];
            i += 1;
        }
        while j < jb.len() && jb[j] == t {
            level_b = lb[j];
            j += 1;
        }
        prev = Some(t);
    }
    Ok(total)
}

/// `int_a^b |F - c| dt` for finite `a < b`.
fn segment_distance<T: Scalar, F: AnalyticCdf<T> + ?Sized>(f: &F, a: T, b: T, c: T) -> T {
    let mass = f.antiderivative(b) - f.antiderivative(a);
    if c <= T::zero() {
        return mass - c * (b - a);
    }
    if c >= T::one() {
        return c * (b - a) - mass;
    }
    let cross = f.inverse_cdf(c).max(a).min(b);
    let g_cross = f.antiderivative(cross);
    let below = c * (cross - a) - (g_cross - f.antiderivative(a));
    let above = (f.antiderivative(b) - g_cross) - c * (b - cross);
    below.max(T::zero()) + above.max(T::zero())
}

/// Exact `int |F - S| dt` between a step function `S` (levels used as
/// given, monotone or not) and a continuous CDF `F`.
pub fn w1_step_vs_analytic<T: Scalar, F: AnalyticCdf<T> + ?Sized>(
    step: &impl StepFunction<T>,
    f: &F,
) -> Result<T> {
    check_terminated(step)?;
    let jumps = step.jumps();
    let levels = step.levels();
    // S = 0 left of the first jump, S = 1 right of the last
    let mut total = f.antiderivative(jumps[0]);
    for k in 0..jumps.len() - 1 {
        total = total + segment_distance(f, jumps[k], jumps[k + 1], levels[k]);
    }
    total = total + f.upper_tail(jumps[jumps.len() - 1]);
    Ok(total)
}

/// Exact W1 between two equal-size empirical measures given as sorted
/// samples.
pub fn empirical_w1<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.is_empty() {
        return Ok(T::zero());
    }
    debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(ys.windows(2).all(|w| w[0] <= w[1]));
    let sum: T = xs.iter().zip(ys).map(|(&a, &b)| (a - b).abs()).sum();
    Ok(sum / T::lit(xs.len() as f64))
}

/// Which version of the estimate is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskMode {
    /// Raw estimator levels, possibly non-monotone.
    Raw,
    /// After isotonic repair and clamping.
    Repaired,
}

impl RiskMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskMode::Raw => "raw",
            RiskMode::Repaired => "repaired",
        }
    }
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub per_replicate: Vec<f64>,
}

impl RiskEstimate {
    /// Mean and `sample_std / sqrt(reps)`; a single value has zero stderr.
    pub fn from_values(values: Vec<f64>) -> Self {
        let reps = values.len();
        let mean = if reps == 0 {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / reps as f64
        };
        let stderr = if reps < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            (var / reps as f64).sqrt()
        };
        Self {
            mean,
            stderr,
            reps,
            per_replicate: values,
        }
    }
}

/// Ground-truth conditional law with an analytic CDF at every `x`.
pub trait ConditionalLaw<T: Scalar>: Sync {
    type Cdf: AnalyticCdf<T>;

    fn dim(&self) -> usize;
    fn cdf_at(&self, x: &[T]) -> Self::Cdf;
    fn draw_x<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T>;
}

/// `E_X int |F(t|X) - F_hat(t|X)| dt` over `x_reps` covariate draws,
/// one estimate per requested mode. All modes share the same draws.
pub fn mc_risk_modes<T, M, P, R>(
    model: &M,
    est: &P,
    rng: &mut R,
    x_reps: usize,
    modes: &[RiskMode],
) -> Result<Vec<RiskEstimate>>
where
    T: Scalar,
    M: ConditionalLaw<T>,
    P: CdfProfiler<T> + ?Sized,
    R: Rng + ?Sized,
{
    if x_reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "risk estimation needs at least 2 covariate draws, got {x_reps}"
        )));
    }
    let xs: Vec<Vec<T>> = (0..x_reps).map(|_| model.draw_x(rng)).collect();
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let profile = est.cdf_profile(x)?;
            let truth = model.cdf_at(x);
            modes
                .iter()
                .map(|mode| {
                    let v = match mode {
                        RiskMode::Raw => w1_step_vs_analytic(&profile, &truth)?,
                        RiskMode::Repaired => {
                            w1_step_vs_analytic(&monotone_rearrange(&profile), &truth)?
                        }
                    };
                    Ok(v.as_f64())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..modes.len())
        .map(|k| RiskEstimate::from_values(rows.iter().map(|r| r[k]).collect()))
        .collect())
}

pub fn mc_risk<T, M, P, R>(
    model: &M,
    est: &P,
    rng: &mut R,
    x_reps: usize,
    mode: RiskMode,
) -> Result<RiskEstimate>
where
    T: Scalar,
    M: ConditionalLaw<T>,
    P: CdfProfiler<T> + ?Sized,
    R: Rng + ?Sized,
{
    Ok(mc_risk_modes(model, est, rng, x_reps, &[mode])?
        .pop()
        .expect("one mode requested"))
}

/// Step approximation of an analytic CDF at `atoms` equal-mass quantiles;
/// used as an oracle estimator.
pub fn discretize<T: Scalar, F: AnalyticCdf<T> + ?Sized>(
    f: &F,
    atoms: usize,
) -> crate::estimator::SteppedCdf<T> {
    let k = T::lit(atoms as f64);
    let mut jump_ts = Vec::with_capacity(atoms);
    let mut raw_levels = Vec::with_capacity(atoms);
    for j in 0..atoms {
        let tau = (T::lit(j as f64) + T::lit(0.5)) / k;
        jump_ts.push(f.inverse_cdf(tau));
        raw_levels.push(T::lit((j + 1) as f64) / k);
    }
    crate::estimator::SteppedCdf {
        jump_ts,
        raw_levels,
        fallback: false,
    }
}
