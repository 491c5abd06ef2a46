//! Inverse-transform generation `Y = F^-1(U | X)` from estimated CDFs.

use rand::Rng;

use crate::error::Result;
use crate::estimator::{monotone_rearrange, CdfProfiler, MonotoneCdf};
use crate::scalar::Scalar;

/// Generalized inverse `inf{t : F(t) >= tau}` of a step CDF.
///
/// Always returns one of the jump locations: `tau = 0` maps to the
/// smallest jump, and ties at a level resolve to the lower jump.
pub fn quantile<T: Scalar>(cdf: &MonotoneCdf<T>, tau: T) -> T {
    let idx = cdf.levels.partition_point(|&l| l < tau);
    cdf.jump_ts[idx.min(cdf.jump_ts.len() - 1)]
}

/// Source of covariate draws for joint sampling.
pub trait CovariateSampler<T> {
    fn dim(&self) -> usize;
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T>;
}

/// Degenerate covariate law at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass<T>(pub Vec<T>);

impl<T: Scalar> CovariateSampler<T> for PointMass<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn draw<R: Rng + ?Sized>(&self, _rng: &mut R) -> Vec<T> {
        self.0.clone()
    }
}

fn uniform<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random::<f64>())
}

/// `k` draws from the repaired estimate at `x`; the profile is built once.
pub fn sample<T, P, R>(est: &P, x: &[T], rng: &mut R, k: usize) -> Result<Vec<T>>
where
    T: Scalar,
    P: CdfProfiler<T> + ?Sized,
    R: Rng + ?Sized,
{
    let cdf = monotone_rearrange(&est.cdf_profile(x)?);
    Ok((0..k).map(|_| quantile(&cdf, uniform(rng))).collect())
}

/// `k` pairs `(X, Y_hat)` with `X` from `x_sampler` and one draw per `X`.
pub fn sample_joint<T, P, S, R>(
    est: &P,
    x_sampler: &S,
    rng: &mut R,
    k: usize,
) -> Result<Vec<(Vec<T>, T)>>
where
    T: Scalar,
    P: CdfProfiler<T> + ?Sized,
    S: CovariateSampler<T>,
    R: Rng + ?Sized,
{
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let x = x_sampler.draw(rng);
        let cdf = monotone_rearrange(&est.cdf_profile(&x)?);
        let y = quantile(&cdf, uniform(rng));
        out.push((x, y));
    }
    Ok(out)
}
