use nalgebra::{DMatrix, DVector};

use super::prob::ProbVec;
use crate::error::{Error, Result};
use crate::report::fingerprint_floats;

/// Row tolerance for kernels built directly from probabilities.
pub const ROW_TOL: f64 = 1e-12;
/// Row tolerance after products of kernels.
pub const POWER_ROW_TOL: f64 = 1e-10;

/// Dense row-stochastic matrix; row `x` is the next-state law from `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticKernel {
    matrix: DMatrix<f64>,
}

impl StochasticKernel {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, ROW_TOL)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidProbability("empty kernel".into()));
        }
        for (r, row) in matrix.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
            if !sum.is_finite() || (sum - 1.0).abs() > tol || min < 0.0 {
                return Err(Error::NotStochastic { row: r, sum, min });
            }
        }
        Ok(StochasticKernel { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        StochasticKernel { matrix: DMatrix::identity(n, n) }
    }

    /// `K(x, ·) = ω(·)` for every `x`.
    pub fn independence(omega: &ProbVec) -> Self {
        let n = omega.len();
        StochasticKernel { matrix: DMatrix::from_fn(n, n, |_, j| omega.get(j)) }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[(x, y)]
    }

    /// `(Kf)(x) = Σ_y K(x,y) f(y)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(f)).data.into()
    }

    /// `(μK)(y) = Σ_x μ(x) K(x,y)`.
    pub fn push_forward(&self, mu: &[f64]) -> Vec<f64> {
        (self.matrix.tr_mul(&DVector::from_column_slice(mu))).data.into()
    }

    /// Largest entry of `|ωK − ω|`.
    pub fn stationarity_defect(&self, omega: &ProbVec) -> f64 {
        self.push_forward(omega.as_slice())
            .iter()
            .zip(omega.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_floats("kernel", self.matrix.transpose().iter())
    }
}

/// Unique left fixed point of `K`.
///
/// The left null space of `K − I` is read off an SVD of `Kᵀ − I`; a second
/// singular value below `1e-8` means the eigenvalue-1 eigenspace is not
/// one-dimensional.
pub fn stationary_distribution(kernel: &StochasticKernel) -> Result<ProbVec> {
    let n = kernel.n();
    if n == 1 {
        return ProbVec::new(vec![1.0]);
    }
    let a = kernel.matrix().transpose() - DMatrix::<f64>::identity(n, n);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let dimension = order.iter().take_while(|&&i| svd.singular_values[i] < 1e-8).count();
    if dimension > 1 {
        return Err(Error::NonUniqueStationary { dimension });
    }
    let v: Vec<f64> = v_t.row(order[0]).iter().cloned().collect();
    let sum: f64 = v.iter().sum();
    if sum.abs() < 1e-300 {
        return Err(Error::Inconsistent("stationary vector sums to zero".into()));
    }
    let weights: Vec<f64> = v.iter().map(|x| (x / sum).max(0.0)).collect();
    let omega = ProbVec::new(weights)?;
    let defect = kernel.stationarity_defect(&omega);
    if defect > 1e-10 {
        return Err(Error::Inconsistent(format!("stationary residual {defect:e} exceeds 1e-10")));
    }
    Ok(omega)
}

/// `Kᵗ` by repeated squaring.
pub fn t_step(kernel: &StochasticKernel, t: usize) -> Result<StochasticKernel> {
    if t == 0 {
        return Err(Error::PreconditionUnmet("t_step needs t >= 1".into()));
    }
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = kernel.matrix().clone();
    let mut e = t;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r * &base,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = &base * &base;
    }
    StochasticKernel::with_tolerance(result.expect("t >= 1"), POWER_ROW_TOL)
}
