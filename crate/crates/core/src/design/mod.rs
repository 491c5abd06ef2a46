//! Local Gram matrices and LP(ell) weights for the indicator kernel on
//! the closed sup-norm ball.

mod linalg;

pub use linalg::{smallest_eigenvalue, SymMatrix};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndexBasis;
use crate::scalar::Scalar;

/// Sample of `n` covariates in `[0,1]^d` with scalar responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    d: usize,
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// `xs` is row-major with `d` coordinates per sample.
    pub fn new(d: usize, xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(d));
        }
        if xs.len() != ys.len() * d {
            return Err(Error::SizeMismatch {
                left: xs.len(),
                right: ys.len() * d,
            });
        }
        for (i, row) in xs.chunks(d).enumerate() {
            if row.iter().any(|&v| !(v >= T::zero() && v <= T::one())) {
                return Err(Error::OutOfCube { index: i });
            }
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter("responses must be finite".into()));
        }
        Ok(Self { d, xs, ys })
    }

    pub fn from_rows(rows: &[Vec<T>], ys: Vec<T>) -> Result<Self> {
        let d = rows.first().map_or(1, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Self::new(d, rows.concat(), ys)
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn x(&self, i: usize) -> &[T] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> T {
        self.ys[i]
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }
}

/// `D_n(x)` together with its smallest eigenvalue and activity flag.
#[derive(Debug, Clone)]
pub struct LocalDesign<T> {
    pub matrix: SymMatrix<T>,
    pub lambda1: T,
    pub active: bool,
    pub neighbors: Vec<usize>,
    pub x: Vec<T>,
    pub h: T,
}

/// Sparse LP(ell) weights at a query point, in neighbor order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    pub entries: Vec<(usize, T)>,
    pub x: Vec<T>,
    pub h: T,
}

impl<T: Scalar> WeightVector<T> {
    pub fn sum(&self) -> T {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, &(_, w)| acc.max(w.abs()))
    }

    pub fn get(&self, index: usize) -> T {
        self.entries
            .iter()
            .find(|&&(i, _)| i == index)
            .map_or(T::zero(), |&(_, w)| w)
    }

    /// `sum_i values[i] * W_i`.
    pub fn apply(&self, values: impl Fn(usize) -> T) -> T {
        self.entries.iter().map(|&(i, w)| values(i) * w).sum()
    }
}

/// `D = int_{[0,1]^d} V V^T`, entry `(a, b)` equal to
/// `prod_j 1/(a_j + b_j + 1) / (a! b!)`.
pub fn reference_design<T: Scalar>(basis: &MultiIndexBasis<T>) -> SymMatrix<T> {
    let m = basis.len();
    let mut out = SymMatrix::zeros(m);
    let idx = basis.indices();
    let inv = basis.inv_factorials();
    for a in 0..m {
        for b in 0..m {
            let moment = idx[a]
                .iter()
                .zip(&idx[b])
                .fold(T::one(), |acc, (&p, &q)| acc / T::lit((p + q + 1) as f64));
            out[(a, b)] = moment * inv[a] * inv[b];
        }
    }
    out
}

/// `p_lower * lambda1(D) / 2`, the threshold used by the rate theory.
pub fn default_threshold<T: Scalar>(basis: &MultiIndexBasis<T>, p_lower: T) -> Result<T> {
    if !(p_lower > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "density lower bound must be positive, got {p_lower}"
        )));
    }
    let l1 = smallest_eigenvalue(&reference_design(basis), T::tolerance())?;
    Ok(p_lower * l1 / T::lit(2.0))
}

fn check_point<T: Scalar>(d: usize, x: &[T]) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    Ok(())
}

/// Builds `D_n(x)` over the closed ball `{X_i : max_j |X_ij - x_j| <= h}`.
pub fn local_design<T: Scalar>(
    data: &Dataset<T>,
    basis: &MultiIndexBasis<T>,
    x: &[T],
    h: T,
    threshold: T,
) -> Result<LocalDesign<T>> {
    check_point(data.dim(), x)?;
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    let m = basis.len();
    let mut matrix = SymMatrix::zeros(m);
    let mut neighbors = Vec::new();
    let mut v = vec![T::zero(); m];
    let mut u = vec![T::zero(); data.dim()];
    for i in 0..data.n() {
        let xi = data.x(i);
        if xi.iter().zip(x).any(|(&a, &b)| (a - b).abs() > h) {
            continue;
        }
        neighbors.push(i);
        for ((uj, &a), &b) in u.iter_mut().zip(xi).zip(x) {
            *uj = (a - b) / h;
        }
        basis.design_vector_into(&u, &mut v);
        matrix.add_outer(&v, T::one());
    }

    if neighbors.is_empty() {
        return Ok(LocalDesign {
            matrix,
            lambda1: T::zero(),
            active: false,
            neighbors,
            x: x.to_vec(),
            h,
        });
    }

    let norm = T::lit(data.n() as f64) * h.powi(data.dim() as i32);
    matrix.scale(T::one() / norm);
    let lambda1 = smallest_eigenvalue(&matrix, T::tolerance())?;
    Ok(LocalDesign {
        matrix,
        lambda1,
        active: lambda1 >= threshold,
        neighbors,
        x: x.to_vec(),
        h,
    })
}

/// LP(ell) weights from an active design, `None` when the design is
/// below threshold.
pub fn lp_weights<T: Scalar>(
    design: &LocalDesign<T>,
    data: &Dataset<T>,
    basis: &MultiIndexBasis<T>,
) -> Result<Option<WeightVector<T>>> {
    if !design.active {
        return Ok(None);
    }
    let m = basis.len();
    let mut e1 = vec![T::zero(); m];
    e1[0] = T::one();
    let z = design.matrix.cholesky_solve(&e1)?;

    let h = design.h;
    let norm = T::lit(data.n() as f64) * h.powi(data.dim() as i32);
    let mut v = vec![T::zero(); m];
    let mut u = vec![T::zero(); data.dim()];
    let entries = design
        .neighbors
        .iter()
        .map(|&i| {
            for ((uj, &a), &b) in u.iter_mut().zip(data.x(i)).zip(&design.x) {
                *uj = (a - b) / h;
            }
            basis.design_vector_into(&u, &mut v);
            let w = z.iter().zip(&v).map(|(&a, &b)| a * b).sum::<T>() / norm;
            (i, w)
        })
        .collect();
    Ok(Some(WeightVector {
        entries,
        x: design.x.clone(),
        h,
    }))
}

/// `||V(1)||_2 / (n h^d threshold)`, the a-priori bound on every weight.
pub fn weight_bound<T: Scalar>(basis: &MultiIndexBasis<T>, n: usize, h: T, threshold: T) -> T {
    let ones = vec![T::one(); basis.dim()];
    let v1 = basis.design_vector(&ones);
    let norm = v1.iter().map(|&v| v * v).sum::<T>().sqrt();
    norm / (T::lit(n as f64) * h.powi(basis.dim() as i32) * threshold)
}
