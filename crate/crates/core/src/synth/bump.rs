//! Smooth compactly supported bumps and the disjoint-support families
//! used as hard regression instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndexBasis;

const GRID_POINTS: usize = 100_000;

/// `exp(-1 / (1 - x^2))` on `|x| < 1`, zero elsewhere.
pub fn psi(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Polynomials `P_k` with `psi^(k)(x) = P_k(x) (1 - x^2)^(-2k) psi(x)`,
/// coefficients in ascending order.
fn derivative_numerators(max_order: usize) -> Vec<Vec<f64>> {
    let u = [1.0, 0.0, -1.0];
    let u2 = poly_mul(&u, &u);
    let mut out = vec![vec![1.0]];
    for k in 0..max_order {
        let p = &out[k];
        let dp: Vec<f64> = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect();
        let term1 = poly_mul(&dp, &u2);
        let term2 = poly_mul(&poly_mul(&[0.0, 4.0 * k as f64], p), &u);
        let term3 = poly_mul(&[0.0, -2.0], p);
        out.push(poly_add(&poly_add(&term1, &term2), &term3));
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `psi^(k)(x)`.
pub fn psi_derivative(k: usize, x: f64) -> f64 {
    let p = &derivative_numerators(k)[k];
    eval_derivative(p, k, x)
}

fn eval_derivative(p: &[f64], k: usize, x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - x * x;
    let v = psi(x);
    if v == 0.0 {
        return 0.0;
    }
    poly_eval(p, x) * v / u.powi(2 * k as i32)
}

/// `sup |psi^(k)|` for `k = 0..=max_order`: dense grid then golden-section
/// refinement around the best grid point.
pub fn derivative_sup_norms(max_order: usize) -> Vec<f64> {
    let polys = derivative_numerators(max_order);
    polys
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let f = |x: f64| eval_derivative(p, k, x).abs();
            let step = 2.0 / GRID_POINTS as f64;
            let (best_i, _) = (1..GRID_POINTS)
                .map(|i| (i, f(-1.0 + i as f64 * step)))
                .fold(
                    (0, f64::MIN),
                    |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                );
            let center = -1.0 + best_i as f64 * step;
            let (mut a, mut b) = ((center - step).max(-1.0), (center + step).min(1.0));
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let c = b - ratio * (b - a);
                let d = a + ratio * (b - a);
                if f(c) > f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            f(0.5 * (a + b)).max(f(center))
        })
        .collect()
}

/// Normalized product bump `g(x) / (2 sqrt(d) K_beta)` with
/// `g(x) = prod_j psi(x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpKernel {
    pub d: usize,
    pub beta: f64,
    /// `max_{|alpha| <= ell + 1} ||d^alpha g||_inf`, `ell = ceil(beta) - 1`.
    pub k_beta: f64,
    /// Grid resolution used for the sup-norms.
    pub grid_points: usize,
}

impl BumpKernel {
    pub fn new(d: usize, beta: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(d));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let ell = crate::estimator::degree_for(beta);
        let sups = derivative_sup_norms(ell + 1);
        let basis = MultiIndexBasis::<f64>::new(d, ell + 1)?;
        // sup of a product of univariate factors is the product of sups
        let k_beta = basis
            .indices()
            .iter()
            .map(|alpha| alpha.iter().map(|&a| sups[a]).product::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            d,
            beta,
            k_beta,
            grid_points: GRID_POINTS,
        })
    }

    pub fn normalization(&self) -> f64 {
        2.0 * (self.d as f64).sqrt() * self.k_beta
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        u.iter().map(|&v| psi(v)).product::<f64>() / self.normalization()
    }

    /// `int |kernel|` over `[-1,1]^d`, via composite Simpson on `psi`.
    pub fn l1_norm(&self) -> f64 {
        let k = 20_000;
        let step = 2.0 / k as f64;
        let mut s = 0.0;
        for i in 0..=k {
            let w = if i == 0 || i == k {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * psi(-1.0 + i as f64 * step);
        }
        let one_dim = s * step / 3.0;
        one_dim.powi(self.d as i32) / self.normalization()
    }
}

/// Bumps of half-width `h_bump` centred on a `2 h_bump` packing grid of
/// `[0,1]^d`, each scaled to `L h_bump^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFamily {
    pub d: usize,
    pub beta: f64,
    pub lipschitz: f64,
    pub h_bump: f64,
    pub centers: Vec<Vec<f64>>,
    pub amplitude: f64,
    pub kernel: BumpKernel,
}

impl BumpFamily {
    pub fn new(d: usize, beta: f64, lipschitz: f64, h_bump: f64) -> Result<Self> {
        if !(h_bump > 0.0 && h_bump <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "bump half-width must lie in (0, 0.5], got {h_bump}"
            )));
        }
        if !(lipschitz > 0.0) {
            return Err(Error::InvalidParameter(
                "Hölder radius must be positive".into(),
            ));
        }
        let kernel = BumpKernel::new(d, beta)?;
        let per_axis = ((1.0 / (2.0 * h_bump)) + 1e-9).floor() as usize;
        let axis: Vec<f64> = (0..per_axis)
            .map(|k| h_bump + 2.0 * h_bump * k as f64)
            .collect();
        let mut centers = vec![Vec::new()];
        for _ in 0..d {
            centers = centers
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        Ok(Self {
            d,
            beta,
            lipschitz,
            h_bump,
            centers,
            amplitude: lipschitz * h_bump.powf(beta),
            kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// The `i`-th alternative bump at `x`.
    pub fn bump(&self, i: usize, x: &[f64]) -> f64 {
        let c = &self.centers[i];
        let u: Vec<f64> = x
            .iter()
            .zip(c)
            .map(|(&a, &b)| (a - b) / self.h_bump)
            .collect();
        if u.iter().any(|v| v.abs() >= 1.0) {
            return 0.0;
        }
        self.amplitude * self.kernel.eval(&u)
    }
}

/// `f_w = sum_i w_i phi_i` for a binary sign vector `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpFunction {
    family: BumpFamily,
    signs: Vec<bool>,
}

impl BumpFunction {
    pub fn family(&self) -> &BumpFamily {
        &self.family
    }

    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.signs
            .iter()
            .enumerate()
            .filter(|&(_, &on)| on)
            .map(|(i, _)| self.family.bump(i, x))
            .sum()
    }
}

pub fn bump_instance(family: &BumpFamily, signs: &[bool]) -> Result<BumpFunction> {
    if signs.len() != family.len() {
        return Err(Error::SizeMismatch {
            left: signs.len(),
            right: family.len(),
        });
    }
    Ok(BumpFunction {
        family: family.clone(),
        signs: signs.to_vec(),
    })
}
