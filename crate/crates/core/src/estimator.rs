//! Thresholded local-polynomial estimator of the conditional CDF.
//!
//! At a query point `x` the estimator is `sum_i 1(Y_i <= t) W_i(x)` when
//! the local Gram matrix clears the eigenvalue threshold, and the unit
//! step `1(t >= 0)` otherwise. Profiles are materialized lazily per `x`.

use std::cmp::Ordering;

use crate::design::{local_design, lp_weights, Dataset};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndexBasis;
use crate::scalar::Scalar;

/// Right-continuous step function given by sorted jump locations and the
/// level reached at each jump (zero to the left of the first jump).
pub trait StepFunction<T: Scalar> {
    fn jumps(&self) -> &[T];
    fn levels(&self) -> &[T];

    fn eval(&self, t: T) -> T {
        let count = self.jumps().partition_point(|&j| j <= t);
        if count == 0 {
            T::zero()
        } else {
            self.levels()[count - 1]
        }
    }

    fn terminal_level(&self) -> T {
        self.levels().last().copied().unwrap_or_else(T::zero)
    }
}

/// Anything that yields a conditional CDF profile at a covariate point.
pub trait CdfProfiler<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn cdf_profile(&self, x: &[T]) -> Result<SteppedCdf<T>>;
}

/// Raw estimator output at one `x`; levels may leave `[0,1]` for `ell >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedCdf<T> {
    pub jump_ts: Vec<T>,
    pub raw_levels: Vec<T>,
    pub fallback: bool,
}

impl<T: Scalar> SteppedCdf<T> {
    /// The unit step `1(t >= 0)` used where the design is below threshold.
    pub fn fallback() -> Self {
        Self {
            jump_ts: vec![T::zero()],
            raw_levels: vec![T::one()],
            fallback: true,
        }
    }

    /// Builds a profile from `(y, weight)` atoms. Equal locations are
    /// merged into one jump carrying the summed weight.
    pub fn from_atoms(mut atoms: Vec<(T, T)>) -> Self {
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut jump_ts: Vec<T> = Vec::with_capacity(atoms.len());
        let mut raw_levels: Vec<T> = Vec::with_capacity(atoms.len());
        let mut acc = T::zero();
        for (y, w) in atoms {
            acc = acc + w;
            if jump_ts.last() == Some(&y) {
                *raw_levels.last_mut().expect("paired with jump") = acc;
            } else {
                jump_ts.push(y);
                raw_levels.push(acc);
            }
        }
        Self {
            jump_ts,
            raw_levels,
            fallback: false,
        }
    }
}

impl<T: Scalar> StepFunction<T> for SteppedCdf<T> {
    fn jumps(&self) -> &[T] {
        &self.jump_ts
    }
    fn levels(&self) -> &[T] {
        &self.raw_levels
    }
}

/// Non-decreasing step CDF with levels in `[0,1]` ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCdf<T> {
    pub jump_ts: Vec<T>,
    pub levels: Vec<T>,
}

impl<T: Scalar> MonotoneCdf<T> {
    /// Validates the monotone-CDF invariants.
    pub fn new(jump_ts: Vec<T>, levels: Vec<T>) -> Result<Self> {
        if jump_ts.len() != levels.len() {
            return Err(Error::SizeMismatch {
                left: jump_ts.len(),
                right: levels.len(),
            });
        }
        if jump_ts.is_empty() {
            return Err(Error::InvalidParameter(
                "CDF needs at least one jump".into(),
            ));
        }
        if jump_ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "jump locations must be strictly increasing".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] > w[1])
            || levels.iter().any(|&l| l < T::zero() || l > T::one())
        {
            return Err(Error::InvalidParameter(
                "levels must be non-decreasing in [0,1]".into(),
            ));
        }
        if *levels.last().expect("non-empty") != T::one() {
            return Err(Error::UnterminatedCdf {
                level: levels.last().expect("non-empty").as_f64(),
            });
        }
        Ok(Self { jump_ts, levels })
    }
}

impl<T: Scalar> StepFunction<T> for MonotoneCdf<T> {
    fn jumps(&self) -> &[T] {
        &self.jump_ts
    }
    fn levels(&self) -> &[T] {
        &self.levels
    }
}

/// Least-squares isotonic fit of `values` (pool adjacent violators, unit
/// weights).
pub fn pool_adjacent_violators<T: Scalar>(values: &[T]) -> Vec<T> {
    // (block sum, block size)
    let mut blocks: Vec<(T, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            // mean0 > mean1, compared without division
            if s0 * T::lit(c1 as f64) > s1 * T::lit(c0 as f64) {
                blocks.pop();
                *blocks.last_mut().expect("two blocks") = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (sum, count) in blocks {
        let mean = sum / T::lit(count as f64);
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}

/// Isotonic projection of the raw levels, clamped to `[0,1]` with the
/// final level pinned to 1.
pub fn monotone_rearrange<T: Scalar>(step: &SteppedCdf<T>) -> MonotoneCdf<T> {
    let mut levels = pool_adjacent_violators(&step.raw_levels);
    for l in &mut levels {
        *l = l.max(T::zero()).min(T::one());
    }
    if let Some(last) = levels.last_mut() {
        *last = T::one();
    }
    MonotoneCdf {
        jump_ts: step.jump_ts.clone(),
        levels,
    }
}

/// `h = n^(-1/(2 beta + d))`.
pub fn bandwidth_for<T: Scalar>(n: usize, beta: T, d: usize) -> T {
    T::lit(n as f64).powf(-T::one() / (T::lit(2.0) * beta + T::lit(d as f64)))
}

/// Polynomial degree matched to smoothness: `ceil(beta) - 1`.
pub fn degree_for(beta: f64) -> usize {
    (beta.ceil() as usize).saturating_sub(1)
}

/// Fitted estimator. Immutable; profiles are computed on demand.
#[derive(Debug, Clone)]
pub struct CdfEstimator<T> {
    data: Dataset<T>,
    basis: MultiIndexBasis<T>,
    h: T,
    threshold: T,
    beta: Option<T>,
}

impl<T: Scalar> CdfEstimator<T> {
    pub fn fit(data: Dataset<T>, ell: usize, h: T, threshold: T) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(h > T::zero() && h <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must lie in (0, 1], got {h}"
            )));
        }
        if !(threshold > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        let basis = MultiIndexBasis::new(data.dim(), ell)?;
        Ok(Self {
            data,
            basis,
            h,
            threshold,
            beta: None,
        })
    }

    /// Fits with `h = n^(-1/(2 beta + d))`, recording `beta`.
    pub fn fit_with_beta(data: Dataset<T>, ell: usize, beta: T, threshold: T) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let h = bandwidth_for(data.n(), beta, data.dim());
        let mut est = Self::fit(data, ell, h, threshold)?;
        est.beta = Some(beta);
        Ok(est)
    }

    /// Records the smoothness `h` was derived from.
    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn data(&self) -> &Dataset<T> {
        &self.data
    }

    pub fn basis(&self) -> &MultiIndexBasis<T> {
        &self.basis
    }

    pub fn bandwidth(&self) -> T {
        self.h
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn beta(&self) -> Option<T> {
        self.beta
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// Raw value of the estimated CDF at `(x, t)`, unclamped.
    pub fn eval_cdf(&self, x: &[T], t: T) -> Result<T> {
        Ok(self.cdf_profile(x)?.eval(t))
    }
}

impl<T: Scalar> CdfProfiler<T> for CdfEstimator<T> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn cdf_profile(&self, x: &[T]) -> Result<SteppedCdf<T>> {
        let design = local_design(&self.data, &self.basis, x, self.h, self.threshold)?;
        match lp_weights(&design, &self.data, &self.basis)? {
            None => Ok(SteppedCdf::fallback()),
            Some(w) => Ok(SteppedCdf::from_atoms(
                w.entries
                    .iter()
                    .map(|&(i, wi)| (self.data.y(i), wi))
                    .collect(),
            )),
        }
    }
}
