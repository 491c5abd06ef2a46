//! Small dense symmetric linear algebra: cyclic Jacobi eigenvalues and
//! Cholesky solves. Matrices here are at most a few dozen rows.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from rows. Panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix rows must be square");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Adds `scale * v v^T`.
    pub fn add_outer(&mut self, v: &[T], scale: T) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let si = scale * v[i];
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for (slot, &vj) in row.iter_mut().zip(v) {
                *slot = *slot + si * vj;
            }
        }
    }

    pub fn scale(&mut self, factor: T) {
        for v in &mut self.data {
            *v = *v * factor;
        }
    }

    /// All eigenvalues in ascending order via cyclic Jacobi rotations on
    /// the symmetrized upper triangle.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (a[(i, j)] + a[(j, i)]) / T::lit(2.0);
                a[(i, j)] = avg;
                a[(j, i)] = avg;
            }
        }
        let frob = a.data.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        let stop = T::epsilon() * frob;

        for _ in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                    let t = if (theta * theta).is_infinite() {
                        T::one() / (T::lit(2.0) * theta)
                    } else {
                        let mag = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                        if theta < T::zero() {
                            -mag
                        } else {
                            mag
                        }
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    a[(p, p)] = a[(p, p)] - t * apq;
                    a[(q, q)] = a[(q, q)] + t * apq;
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = c * arp - s * arq;
                        let new_rq = s * arp + c * arq;
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                }
            }
        }
        let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        eig
    }

    /// Solves `self * z = rhs` by Cholesky factorization. Fails when a
    /// pivot is not strictly positive.
    pub fn cholesky_solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.dim;
        debug_assert_eq!(rhs.len(), n);
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut diag = self[(j, j)];
            for k in 0..j {
                diag = diag - l[j * n + k] * l[j * n + k];
            }
            if !(diag > T::zero()) {
                return Err(Error::SolveFailure { pivot: j });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut v = self[(i, j)];
                for k in 0..j {
                    v = v - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / ljj;
            }
        }
        // forward: L y = rhs
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut v = y[i];
            for k in 0..i {
                v = v - l[i * n + k] * y[k];
            }
            y[i] = v / l[i * n + i];
        }
        // backward: L^T z = y
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v = v - l[k * n + i] * y[k];
            }
            y[i] = v / l[i * n + i];
        }
        Ok(y)
    }
}

impl<T> std::ops::Index<(usize, usize)> for SymMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SymMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

/// Smallest eigenvalue of a symmetric matrix.
///
/// Rejects inputs whose asymmetry exceeds `tol`. An empty matrix has no
/// spectrum and reports zero.
pub fn smallest_eigenvalue<T: Scalar>(mat: &SymMatrix<T>, tol: T) -> Result<T> {
    let asym = mat.asymmetry();
    if asym > tol {
        return Err(Error::NotSymmetric {
            asymmetry: asym.as_f64(),
            tol: tol.as_f64(),
        });
    }
    Ok(mat
        .symmetric_eigenvalues()
        .first()
        .copied()
        .unwrap_or_else(T::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_zero() {
        assert_eq!(
            smallest_eigenvalue(&SymMatrix::<f64>::identity(3), 1e-12).unwrap(),
            1.0
        );
        assert_eq!(
            smallest_eigenvalue(&SymMatrix::<f64>::zeros(4), 1e-12).unwrap(),
            0.0
        );
    }

    #[test]
    fn hilbert_two_by_two() {
        // characteristic polynomial l^2 - (4/3) l + 1/12; bisection oracle
        let charpoly = |l: f64| l * l - 4.0 / 3.0 * l + 1.0 / 12.0;
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if charpoly(lo) * charpoly(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - (4.0 - 13f64.sqrt()) / 6.0).abs() < 1e-15);
        let m = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0 / 3.0]]);
        let l1 = smallest_eigenvalue(&m, 1e-12).unwrap();
        assert!((l1 - root).abs() < 1e-14, "{l1} vs {root}");
        assert!((l1 - 0.06574).abs() < 1e-5);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(matches!(
            smallest_eigenvalue(&m, 1e-12),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn agrees_with_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 1 + trial % 12;
            let mut rows = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for j in i..n {
                    let v: f64 = rng.random_range(-3.0..3.0);
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let ours = smallest_eigenvalue(&SymMatrix::from_rows(&rows), 1e-12).unwrap();
            let flat: Vec<f64> = rows.concat();
            let oracle = DMatrix::from_row_slice(n, n, &flat)
                .symmetric_eigen()
                .eigenvalues
                .min();
            assert!((ours - oracle).abs() < 1e-9, "n={n}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let m = SymMatrix::from_rows(&[
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ]);
        let z = m.cholesky_solve(&[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            let lhs: f64 = (0..3).map(|j| m[(i, j)] * z[j]).sum();
            assert!((lhs - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
        }
        let singular = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            singular.cholesky_solve(&[1.0, 0.0]),
            Err(Error::SolveFailure { .. })
        ));
    }
}
