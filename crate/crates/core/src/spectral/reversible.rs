use super::kernel::StochasticKernel;
use super::prob::ProbVec;
use crate::error::{Error, Result};

/// Default absolute tolerance on `|ω(x)K(x,y) − ω(y)K(y,x)|`.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// A kernel together with a distribution it satisfies detailed balance for.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversiblePair {
    kernel: StochasticKernel,
    stationary: ProbVec,
    reversibility_defect: f64,
    stationarity_defect: f64,
}

impl ReversiblePair {
    pub fn kernel(&self) -> &StochasticKernel {
        &self.kernel
    }

    pub fn stationary(&self) -> &ProbVec {
        &self.stationary
    }

    pub fn reversibility_defect(&self) -> f64 {
        self.reversibility_defect
    }

    pub fn stationarity_defect(&self) -> f64 {
        self.stationarity_defect
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn into_parts(self) -> (StochasticKernel, ProbVec) {
        (self.kernel, self.stationary)
    }
}

/// Largest detailed-balance violation and the pair where it occurs.
pub fn reversibility_defect(kernel: &StochasticKernel, omega: &ProbVec) -> (f64, usize, usize) {
    let n = kernel.n();
    let mut worst = (0.0, 0, 0);
    for x in 0..n {
        for y in (x + 1)..n {
            let d = (omega.get(x) * kernel.get(x, y) - omega.get(y) * kernel.get(y, x)).abs();
            if d > worst.0 {
                worst = (d, x, y);
            }
        }
    }
    worst
}

/// Verifies detailed balance of `kernel` against `omega` at `tol`.
pub fn check_reversibility(kernel: StochasticKernel, omega: ProbVec, tol: f64) -> Result<ReversiblePair> {
    if kernel.n() != omega.len() {
        return Err(Error::DimensionMismatch { expected: kernel.n(), found: omega.len() });
    }
    let (defect, x, y) = reversibility_defect(&kernel, &omega);
    if defect > tol {
        return Err(Error::NotReversible { x, y, defect });
    }
    let stationarity_defect = kernel.stationarity_defect(&omega);
    Ok(ReversiblePair { kernel, stationary: omega, reversibility_defect: defect, stationarity_defect })
}
