use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A probability vector over a finite state space, normalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVec {
    weights: Vec<f64>,
}

impl ProbVec {
    /// Normalizes nonnegative finite weights with positive total.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty weight vector".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidProbability(format!("weight {i} is {w}")));
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidProbability("weights sum to zero".into()));
        }
        Ok(ProbVec { weights: weights.into_iter().map(|w| w / total).collect() })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        ProbVec::new(vec![1.0; n])
    }

    /// Point mass at `state`.
    pub fn delta(n: usize, state: usize) -> Result<Self> {
        if state >= n {
            return Err(Error::DimensionMismatch { expected: n, found: state + 1 });
        }
        let mut w = vec![0.0; n];
        w[state] = 1.0;
        ProbVec::new(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Indices with strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i).collect()
    }

    /// Expectation of `f` under this distribution.
    pub fn mean(&self, f: &FunctionVec) -> f64 {
        self.weights.iter().zip(f.as_slice()).map(|(w, v)| w * v).sum()
    }

    /// `<f, g>` in the weighted L² space.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }
}

/// A real-valued observable over the states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionVec {
    values: Vec<f64>,
}

impl FunctionVec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProbability(format!(
                "function value {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(FunctionVec { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        FunctionVec { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// `f - ωf`, the projection onto mean-zero functions under `omega`.
    pub fn centered(&self, omega: &ProbVec) -> Result<FunctionVec> {
        if omega.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: omega.len(), found: self.len() });
        }
        let m = omega.mean(self);
        Ok(FunctionVec { values: self.values.iter().map(|v| v - m).collect() })
    }

    pub fn scaled(&self, c: f64) -> FunctionVec {
        FunctionVec { values: self.values.iter().map(|v| v * c).collect() }
    }
}
