//! Conditional generative modelling by local-polynomial CDF estimation.
//!
//! The estimator replaces the conditional CDF `F(t | x)` by
//! `sum_i 1(Y_i <= t) W_i(x)`, where `W_i` are the LP(ell) weights of a
//! local polynomial fit with the indicator kernel on the sup-norm ball of
//! radius `h`, and falls back to the unit step wherever the smallest
//! eigenvalue of the local Gram matrix is below a threshold. Samples are
//! produced by inverse transform, and quality is scored by the averaged
//! Wasserstein-1 distance to the true conditional law.
//!
//! The numeric core is generic over [`Scalar`] (`f32` / `f64`); the
//! synthetic models, harness and file formats work in `f64`. Concrete
//! aliases are provided below.

// `!(x > 0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod multiindex;
pub mod risk;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod synth;

pub use design::{
    default_threshold, local_design, lp_weights, reference_design, smallest_eigenvalue,
    weight_bound, Dataset, LocalDesign, SymMatrix, WeightVector,
};
pub use error::{Error, Result};
pub use estimator::{
    bandwidth_for, degree_for, monotone_rearrange, CdfEstimator, CdfProfiler, MonotoneCdf,
    StepFunction, SteppedCdf,
};
pub use multiindex::MultiIndexBasis;
pub use risk::{
    empirical_w1, mc_risk, mc_risk_modes, w1_step_vs_analytic, w1_step_vs_step, AnalyticCdf,
    ConditionalLaw, GaussianCdf, RiskEstimate, RiskMode,
};
pub use rng::RandomSource;
pub use sampler::{quantile, sample, sample_joint, CovariateSampler, PointMass};
pub use scalar::Scalar;
pub use synth::{gaussian_model, ConditionalModel, CovariateLaw, ModelSpec, RegressionFn};

pub type MultiIndexBasisF64 = MultiIndexBasis<f64>;
pub type MultiIndexBasisF32 = MultiIndexBasis<f32>;
pub type DatasetF64 = Dataset<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type CdfEstimatorF64 = CdfEstimator<f64>;
pub type CdfEstimatorF32 = CdfEstimator<f32>;
pub type SteppedCdfF64 = SteppedCdf<f64>;
pub type SteppedCdfF32 = SteppedCdf<f32>;
pub type MonotoneCdfF64 = MonotoneCdf<f64>;
pub type MonotoneCdfF32 = MonotoneCdf<f32>;
pub type GaussianCdfF64 = GaussianCdf<f64>;
