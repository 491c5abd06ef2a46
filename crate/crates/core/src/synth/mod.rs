//! Synthetic ground truth: Gaussian regression models `Y = f0(X) + eps`
//! with known conditional CDF `Phi((t - f0(x)) / sigma)`, and covariate
//! laws with explicit density bounds.

mod bump;

pub use bump::{
    bump_instance, derivative_sup_norms, psi, psi_derivative, BumpFamily, BumpFunction, BumpKernel,
};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::multiindex::MultiIndexBasis;
use crate::risk::{ConditionalLaw, GaussianCdf};
use crate::sampler::CovariateSampler;

/// Built-in regression functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegressionFn {
    Constant {
        value: f64,
    },
    /// `intercept + slope . x`
    Affine {
        intercept: f64,
        slope: Vec<f64>,
    },
    /// `amplitude * sin(2 pi frequency * mean(x))`
    Sinusoid {
        amplitude: f64,
        frequency: f64,
    },
    /// Disjoint-support bump combination `sum_i w_i L h^beta Phi((x - z_i)/h)`.
    Bumps {
        beta: f64,
        lipschitz: f64,
        h_bump: f64,
        signs: Vec<bool>,
    },
}

/// Covariate distribution on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CovariateLaw {
    Uniform,
    /// Product density `prod_j (1 + b cos(2 pi x_j))`, `0 <= b < 1`.
    Cosine {
        b: f64,
    },
}

impl CovariateLaw {
    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            CovariateLaw::Uniform => 1.0,
            CovariateLaw::Cosine { b } => {
                x.iter().map(|&v| 1.0 + b * (2.0 * PI * v).cos()).product()
            }
        }
    }

    /// `(p_lower, p_upper)` in dimension `d`.
    pub fn density_bounds(&self, d: usize) -> (f64, f64) {
        match self {
            CovariateLaw::Uniform => (1.0, 1.0),
            CovariateLaw::Cosine { b } => ((1.0 - b).powi(d as i32), (1.0 + b).powi(d as i32)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CovariateLaw::Uniform => Ok(()),
            CovariateLaw::Cosine { b } if (0.0..1.0).contains(b) => Ok(()),
            CovariateLaw::Cosine { b } => Err(Error::InvalidParameter(format!(
                "cosine covariate law needs 0 <= b < 1, got {b}"
            ))),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Vec<f64> {
        match self {
            CovariateLaw::Uniform => (0..d).map(|_| rng.random::<f64>()).collect(),
            CovariateLaw::Cosine { b } => (0..d)
                .map(|_| loop {
                    // rejection against the uniform envelope (1 + b)
                    let x: f64 = rng.random();
                    let accept: f64 = rng.random();
                    if accept * (1.0 + b) <= 1.0 + b * (2.0 * PI * x).cos() {
                        break x;
                    }
                })
                .collect(),
        }
    }
}

/// Serializable description of a synthetic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub f0: RegressionFn,
    pub sigma: f64,
    pub covariates: CovariateLaw,
}

impl ModelSpec {
    /// Built-in named models in dimension `d`.
    ///
    /// * `gauss-sin`: `sin(2 pi x)/4`, `sigma = 0.5`, uniform covariates
    /// * `gauss-sin-cos`: same regression with cosine-modulated covariates
    /// * `gauss-zero`: `f0 = 0`, `sigma = 1`
    /// * `gauss-affine`: `f0(x) = sum x_j`, `sigma = 1`
    /// * `gauss-bumps`: alternating bumps with `beta = 1`, `L = 1`, `h = 0.125`
    pub fn named(name: &str, d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(d));
        }
        let sinusoid = RegressionFn::Sinusoid {
            amplitude: 0.25,
            frequency: 1.0,
        };
        let spec = match name {
            "gauss-sin" => Self {
                d,
                f0: sinusoid,
                sigma: 0.5,
                covariates: CovariateLaw::Uniform,
            },
            "gauss-sin-cos" => Self {
                d,
                f0: sinusoid,
                sigma: 0.5,
                covariates: CovariateLaw::Cosine { b: 0.5 },
            },
            "gauss-zero" => Self {
                d,
                f0: RegressionFn::Constant { value: 0.0 },
                sigma: 1.0,
                covariates: CovariateLaw::Uniform,
            },
            "gauss-affine" => Self {
                d,
                f0: RegressionFn::Affine {
                    intercept: 0.0,
                    slope: vec![1.0; d],
                },
                sigma: 1.0,
                covariates: CovariateLaw::Uniform,
            },
            "gauss-bumps" => {
                let h_bump = 0.125;
                let per_axis = (1.0 / (2.0 * h_bump)) as usize;
                let count = per_axis.pow(d as u32);
                Self {
                    d,
                    f0: RegressionFn::Bumps {
                        beta: 1.0,
                        lipschitz: 1.0,
                        h_bump,
                        signs: (0..count).map(|i| i % 2 == 0).collect(),
                    },
                    sigma: 0.5,
                    covariates: CovariateLaw::Uniform,
                }
            }
            other => return Err(Error::UnknownSpec(other.to_string())),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Regression {
    Spec(RegressionFn),
    Bumps(BumpFunction),
}

/// Gaussian regression model with analytic conditional CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    spec: ModelSpec,
    regression: Regression,
}

/// Validates `spec` and materializes the model.
pub fn gaussian_model(spec: ModelSpec) -> Result<ConditionalModel> {
    if spec.d < 1 {
        return Err(Error::InvalidDimension(spec.d));
    }
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be positive, got {}",
            spec.sigma
        )));
    }
    spec.covariates.validate()?;
    let regression = match &spec.f0 {
        RegressionFn::Affine { slope, .. } if slope.len() != spec.d => {
            return Err(Error::DimensionMismatch {
                expected: spec.d,
                got: slope.len(),
            })
        }
        RegressionFn::Bumps {
            beta,
            lipschitz,
            h_bump,
            signs,
        } => {
            let family = BumpFamily::new(spec.d, *beta, *lipschitz, *h_bump)?;
            Regression::Bumps(bump_instance(&family, signs)?)
        }
        other => Regression::Spec(other.clone()),
    };
    Ok(ConditionalModel { spec, regression })
}

impl ConditionalModel {
    pub fn named(name: &str, d: usize) -> Result<Self> {
        gaussian_model(ModelSpec::named(name, d)?)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn sigma(&self) -> f64 {
        self.spec.sigma
    }

    pub fn covariates(&self) -> &CovariateLaw {
        &self.spec.covariates
    }

    pub fn density_bounds(&self) -> (f64, f64) {
        self.spec.covariates.density_bounds(self.spec.d)
    }

    /// `f0(x) = E[Y | X = x]`.
    pub fn regression(&self, x: &[f64]) -> f64 {
        match &self.regression {
            Regression::Bumps(f) => f.eval(x),
            Regression::Spec(RegressionFn::Constant { value }) => *value,
            Regression::Spec(RegressionFn::Affine { intercept, slope }) => {
                intercept + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
            Regression::Spec(RegressionFn::Sinusoid {
                amplitude,
                frequency,
            }) => {
                let s = x.iter().sum::<f64>() / x.len() as f64;
                amplitude * (2.0 * PI * frequency * s).sin()
            }
            Regression::Spec(RegressionFn::Bumps { .. }) => unreachable!("materialized"),
        }
    }

    /// Conditional quantile `f0(x) + sigma Phi^-1(tau)`.
    pub fn quantile(&self, x: &[f64], tau: f64) -> f64 {
        self.regression(x) + self.spec.sigma * crate::risk::std_normal_quantile(tau)
    }

    /// Declared or derived `(L, beta)` label: an upper bound on the Hölder
    /// norm of `f0` on `[0,1]^d` at smoothness `beta`. Bumps report their
    /// construction radius; other built-ins bound derivatives directly.
    pub fn smoothness(&self, beta: f64) -> (f64, f64) {
        let d = self.spec.d;
        let ell = crate::estimator::degree_for(beta);
        let radius = match &self.spec.f0 {
            RegressionFn::Bumps { lipschitz, .. } => *lipschitz,
            RegressionFn::Constant { value } => value.abs() * if ell == 0 { 2.0 } else { 1.0 },
            RegressionFn::Affine { intercept, slope } => {
                let sup0 = intercept.abs() + slope.iter().map(|v| v.abs()).sum::<f64>();
                let lip = slope.iter().map(|v| v.abs()).sum::<f64>();
                match ell {
                    0 => lip.max(2.0 * sup0),
                    1 => sup0 + slope.iter().fold(0.0f64, |m, v| m.max(2.0 * v.abs())),
                    _ => sup0 + lip,
                }
            }
            RegressionFn::Sinusoid {
                amplitude,
                frequency,
            } => {
                // |d^alpha f| <= A (2 pi f / d)^|alpha|; Lipschitz in sup-norm picks up 2 pi f
                let w = 2.0 * PI * frequency;
                let a = amplitude.abs();
                let basis = MultiIndexBasis::<f64>::new(d, ell).expect("d >= 1");
                let mut lower = 0.0;
                let mut top = 0.0f64;
                for alpha in basis.indices() {
                    let order = alpha.iter().sum::<usize>() as i32;
                    let sup = a * (w / d as f64).powi(order);
                    if (order as usize) < ell {
                        lower += sup;
                    } else {
                        top = top.max((sup * w).max(2.0 * sup));
                    }
                }
                lower + top
            }
        };
        (radius, beta)
    }

    pub fn draw_covariate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.spec.covariates.draw(self.spec.d, rng)
    }

    /// i.i.d. sample of size `n`.
    pub fn sample_dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset<f64>> {
        if n < 1 {
            return Err(Error::EmptyDataset);
        }
        let mut xs = Vec::with_capacity(n * self.spec.d);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.draw_covariate(rng);
            let noise: f64 = rng.sample(StandardNormal);
            ys.push(self.regression(&x) + self.spec.sigma * noise);
            xs.extend(x);
        }
        Dataset::new(self.spec.d, xs, ys)
    }
}

impl ConditionalLaw<f64> for ConditionalModel {
    type Cdf = GaussianCdf<f64>;

    fn dim(&self) -> usize {
        self.spec.d
    }

    fn cdf_at(&self, x: &[f64]) -> GaussianCdf<f64> {
        GaussianCdf::new(self.regression(x), self.spec.sigma)
    }

    fn draw_x<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.draw_covariate(rng)
    }
}

impl CovariateSampler<f64> for ConditionalModel {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.draw_covariate(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::AnalyticCdf;
    use crate::rng::RandomSource;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
        let step = (b - a) / k as f64;
        let mut s = f(a) + f(b);
        for i in 1..k {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * step);
        }
        s * step / 3.0
    }

    #[test]
    fn named_models() {
        let zero = ConditionalModel::named("gauss-zero", 2).unwrap();
        for x in [[0.1, 0.2], [0.9, 0.5]] {
            assert_eq!(zero.cdf_at(&x).cdf(0.0), 0.5);
        }
        let aff = gaussian_model(ModelSpec {
            d: 1,
            f0: RegressionFn::Affine {
                intercept: 0.0,
                slope: vec![1.0],
            },
            sigma: 1.0,
            covariates: CovariateLaw::Uniform,
        })
        .unwrap();
        assert!((aff.quantile(&[0.3], 0.5) - 0.3).abs() < 1e-15);
        assert!(matches!(
            ModelSpec::named("gauss-nope", 1),
            Err(Error::UnknownSpec(_))
        ));
        let sin = ConditionalModel::named("gauss-sin", 1).unwrap();
        assert!((sin.regression(&[0.25]) - 0.25).abs() < 1e-15);
        assert!(ConditionalModel::named("gauss-bumps", 1).is_ok());
        assert!(ConditionalModel::named("gauss-sin-cos", 2).is_ok());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ModelSpec::named("gauss-sin", 1).unwrap();
        spec.sigma = 0.0;
        assert!(gaussian_model(spec).is_err());
        let mut spec = ModelSpec::named("gauss-sin", 1).unwrap();
        spec.covariates = CovariateLaw::Cosine { b: 1.0 };
        assert!(gaussian_model(spec).is_err());
        let mut spec = ModelSpec::named("gauss-affine", 2).unwrap();
        spec.d = 3;
        assert!(gaussian_model(spec).is_err());
    }

    #[test]
    fn half_normal_mean() {
        let oracle = 2.0
            * simpson(
                |y| y * (-0.5 * y * y).exp() / (2.0 * PI).sqrt(),
                0.0,
                40.0,
                40_000,
            );
        assert!((oracle - (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((oracle - 0.7979).abs() < 1e-4);
    }

    #[test]
    fn gaussian_self_consistency() {
        let m = ConditionalModel::named("gauss-sin", 1).unwrap();
        for x in [0.0, 0.3, 0.8] {
            let f = m.cdf_at(&[x]);
            for k in -40..=40 {
                let t = k as f64 * 0.05;
                assert!((f.inverse_cdf(f.cdf(t)) - t).abs() < 1e-9);
                let e = 1e-5;
                let fd = (f.antiderivative(t + e) - f.antiderivative(t - e)) / (2.0 * e);
                assert!((fd - f.cdf(t)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn third_absolute_moment_is_finite_and_matches_formula() {
        // E|Z|^3 = 2 sqrt(2/pi) for standard normal; sup_x E|Y|^3 is bounded
        let oracle = 2.0
            * simpson(
                |z| z.powi(3) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt(),
                0.0,
                40.0,
                40_000,
            );
        assert!((oracle - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-10);
        let m = ConditionalModel::named("gauss-sin", 1).unwrap();
        for x in [0.1, 0.25, 0.6] {
            let mu = m.regression(&[x]);
            let s = m.sigma();
            let direct = simpson(
                |y| {
                    y.abs().powi(3) * (-0.5 * ((y - mu) / s).powi(2)).exp()
                        / (s * (2.0 * PI).sqrt())
                },
                mu - 40.0 * s,
                mu + 40.0 * s,
                80_000,
            );
            let bound = 4.0 * (mu.abs().powi(3) + s.powi(3) * oracle);
            assert!(direct.is_finite() && direct <= bound);
        }
    }

    #[test]
    fn density_bounds_match_grid() {
        for law in [CovariateLaw::Uniform, CovariateLaw::Cosine { b: 0.5 }] {
            let (lo, hi) = law.density_bounds(1);
            let grid: Vec<f64> = (0..=10_000)
                .map(|i| law.density(&[i as f64 / 10_000.0]))
                .collect();
            let min = grid.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((min - lo).abs() < 1e-9 && (max - hi).abs() < 1e-9);
            assert!((simpson(|x| law.density(&[x]), 0.0, 1.0, 1000) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_sampling() {
        let m = ConditionalModel::named("gauss-sin", 1).unwrap();
        let src = RandomSource::new(7);
        let a = m.sample_dataset(5, &mut src.stream(0, 0)).unwrap();
        let b = m.sample_dataset(5, &mut src.stream(0, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 5);

        let n = 100_000;
        let big = m.sample_dataset(n, &mut src.stream(1, 0)).unwrap();
        let resid: f64 = (0..n)
            .map(|i| big.y(i) - m.regression(big.x(i)))
            .sum::<f64>()
            / n as f64;
        assert!(resid.abs() < 3.0 * m.sigma() / (n as f64).sqrt());

        // chi-square over 20 bins, 19 dof; 99.9% quantile is 43.82
        let mut bins = [0usize; 20];
        for i in 0..n {
            bins[((big.x(i)[0] * 20.0) as usize).min(19)] += 1;
        }
        let expected = n as f64 / 20.0;
        let chi2: f64 = bins
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }

    #[test]
    fn cosine_law_sampling_follows_density() {
        let law = CovariateLaw::Cosine { b: 0.5 };
        let mut rng = RandomSource::new(3).stream(0, 0);
        let n = 100_000;
        let mut bins = [0usize; 10];
        for _ in 0..n {
            bins[((law.draw(1, &mut rng)[0] * 10.0) as usize).min(9)] += 1;
        }
        for (k, &c) in bins.iter().enumerate() {
            let p = simpson(
                |x| law.density(&[x]),
                k as f64 / 10.0,
                (k + 1) as f64 / 10.0,
                200,
            );
            let e = p * n as f64;
            assert!((c as f64 - e).abs() < 5.0 * e.sqrt(), "bin {k}");
        }
    }

    #[test]
    fn hamming_neighbors_differ_by_one_bump_mass() {
        let fam = BumpFamily::new(1, 1.0, 1.0, 0.125).unwrap();
        let mut w = vec![false; fam.len()];
        w[0] = true;
        let mut w2 = w.clone();
        w2[1] = true;
        let f = bump_instance(&fam, &w).unwrap();
        let g = bump_instance(&fam, &w2).unwrap();
        let dist = simpson(|x| (f.eval(&[x]) - g.eval(&[x])).abs(), 0.0, 1.0, 200_000);
        let kernel_l1 = simpson(|u| fam.kernel.eval(&[u]), -1.0, 1.0, 200_000);
        let expected = fam.amplitude * fam.h_bump * kernel_l1;
        assert!((dist - expected).abs() < 1e-9);
        assert!((fam.kernel.l1_norm() - kernel_l1).abs() < 1e-9);
    }

    #[test]
    fn smoothness_labels() {
        let m = ConditionalModel::named("gauss-sin", 1).unwrap();
        let (l, beta) = m.smoothness(1.0);
        assert_eq!(beta, 1.0);
        // ell = 0: max(Lipschitz, 2 sup) = max(A 2pi, 2A)
        assert!((l - 0.25 * 2.0 * PI).abs() < 1e-12);
        let (l2, _) = m.smoothness(2.0);
        assert!((l2 - (0.25 + 0.25 * (2.0 * PI).powi(2))).abs() < 1e-12);
        let b = ConditionalModel::named("gauss-bumps", 1).unwrap();
        assert_eq!(b.smoothness(1.0).0, 1.0);
    }
}
