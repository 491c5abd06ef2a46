//! Total-degree multi-index sets and the monomial design vector.
//!
//! For dimension `d` and degree `ell` the basis holds every
//! `alpha in {0..ell}^d` with `|alpha| <= ell`, sorted lexicographically
//! (componentwise, left to right). The all-zero index comes first, so the
//! design vector at the origin is the first standard basis vector.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexBasis<T> {
    d: usize,
    ell: usize,
    indices: Vec<Vec<usize>>,
    inv_factorials: Vec<T>,
}

impl<T: Scalar> MultiIndexBasis<T> {
    pub fn new(d: usize, ell: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(d));
        }
        let mut indices = Vec::new();
        let mut current = vec![0usize; d];
        enumerate(0, ell, &mut current, &mut indices);

        let inv_factorials = indices
            .iter()
            .map(|alpha| {
                let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
                T::lit(1.0 / fact)
            })
            .collect();

        Ok(Self {
            d,
            ell,
            indices,
            inv_factorials,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.ell
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn inv_factorials(&self) -> &[T] {
        &self.inv_factorials
    }

    /// `V(u) = (u^alpha / alpha!)` in basis order.
    pub fn design_vector(&self, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        self.design_vector_into(u, &mut out);
        out
    }

    /// Writes `V(u)` into `out`, which must have length `self.len()`.
    pub fn design_vector_into(&self, u: &[T], out: &mut [T]) {
        debug_assert_eq!(u.len(), self.d);
        debug_assert_eq!(out.len(), self.len());
        // scaled[j][k] = u_j^k / k!
        let stride = self.ell + 1;
        let mut scaled = vec![T::one(); self.d * stride];
        for (j, &uj) in u.iter().enumerate() {
            for k in 1..stride {
                scaled[j * stride + k] = scaled[j * stride + k - 1] * uj / T::lit(k as f64);
            }
        }
        for (slot, alpha) in out.iter_mut().zip(&self.indices) {
            *slot = alpha
                .iter()
                .enumerate()
                .fold(T::one(), |acc, (j, &a)| acc * scaled[j * stride + a]);
        }
    }
}

fn enumerate(pos: usize, budget: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for a in 0..=budget {
        current[pos] = a;
        enumerate(pos + 1, budget - a, current, out);
    }
    current[pos] = 0;
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
