//! Slice samplers on a finite set with exact integration over the auxiliary
//! level.
//!
//! For an unnormalized weight `m̃` with distinct values `0 = v₀ < v₁ < … < v_K`,
//! level `k` (0-based) covers the interval `(v_k, v_{k+1}]` and has level set
//! `G_k = {y : m̃(y) ≥ v_{k+1}}`. A level draw from `y` lands in level `k` with
//! probability `(v_{k+1} − v_k)/m̃(y)` whenever `y ∈ G_k`.

use nalgebra::DMatrix;

use super::approx::{rule_kernel, ApproxRule};
use super::joint::JointDistribution;
use super::scan::ASSEMBLY_ROW_TOL;
use super::space::ProductSpace;
use crate::error::{Error, Result};
use crate::spectral::{check_reversibility, ProbVec, ReversiblePair, StochasticKernel, REVERSIBILITY_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SliceModel {
    weights: Vec<f64>,
    levels: Vec<f64>,
    level_sets: Vec<Vec<usize>>,
    level_kernels: Vec<Option<ReversiblePair>>,
}

impl SliceModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("slice weights are empty".into()));
        }
        for (state, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { state, value });
            }
        }
        let mut levels = weights.clone();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let level_sets = levels[1..]
            .iter()
            .map(|&v| (0..weights.len()).filter(|&y| weights[y] >= v).collect())
            .collect::<Vec<Vec<usize>>>();
        let k = level_sets.len();
        Ok(SliceModel { weights, levels, level_sets, level_kernels: vec![None; k] })
    }

    /// Installs `kernel` on level `k`; it must be reversible with respect to
    /// the uniform law on `G_k`.
    pub fn with_level_kernel(mut self, k: usize, kernel: StochasticKernel) -> Result<Self> {
        let size = self.level_set(k)?.len();
        let pair = check_reversibility(kernel, ProbVec::uniform(size)?, REVERSIBILITY_TOL)?;
        self.level_kernels[k] = Some(pair);
        Ok(self)
    }

    /// Builds level `k`'s kernel from an approximation rule aimed at uniform
    /// on `G_k`. Explicit matrices go through [`SliceModel::with_level_kernel`].
    pub fn with_level_rule(self, k: usize, rule: &ApproxRule) -> Result<Self> {
        let size = self.level_set(k)?.len();
        let pair = rule_kernel(rule, &ProbVec::uniform(size)?, None)?;
        self.with_level_kernel(k, pair.into_parts().0)
    }

    pub fn with_all_levels(mut self, rule: &ApproxRule) -> Result<Self> {
        for k in 0..self.n_levels() {
            self = self.with_level_rule(k, rule)?;
        }
        Ok(self)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_states(&self) -> usize {
        self.weights.len()
    }

    /// Level boundaries `v₀ = 0 < v₁ < … < v_K`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.level_sets.len()
    }

    pub fn level_length(&self, k: usize) -> f64 {
        self.levels[k + 1] - self.levels[k]
    }

    pub fn level_set(&self, k: usize) -> Result<&[usize]> {
        self.level_sets
            .get(k)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidSpec(format!("level {k} out of range 0..{}", self.n_levels())))
    }

    pub fn level_kernel(&self, k: usize) -> Option<&ReversiblePair> {
        self.level_kernels.get(k).and_then(Option::as_ref)
    }

    /// Normalized weights, the stationary law of every slice kernel.
    pub fn target(&self) -> Result<ProbVec> {
        ProbVec::new(self.weights.clone())
    }

    /// `(k, P(level k | y))` for the levels reachable from `y`.
    pub fn level_law(&self, y: usize) -> Vec<(usize, f64)> {
        (0..self.n_levels())
            .take_while(|&k| self.levels[k] < self.weights[y])
            .map(|k| (k, self.level_length(k) / self.weights[y]))
            .collect()
    }

    /// The joint on `(state, level)` whose two-block augmentation is the slice
    /// sampler: `Π(y, k) ∝ (v_{k+1} − v_k)·1{y ∈ G_k}`.
    pub fn as_joint(&self) -> Result<JointDistribution> {
        let d = self.n_states();
        let space = ProductSpace::new(vec![d, self.n_levels()])?;
        let mut w = vec![0.0; space.total()];
        for y in 0..d {
            for (k, _) in self.level_law(y) {
                w[y + d * k] = self.level_length(k);
            }
        }
        JointDistribution::new(space, w)
    }

    fn integrate(&self, mut level_matrix: impl FnMut(usize) -> Result<DMatrix<f64>>) -> Result<ReversiblePair> {
        let d = self.n_states();
        let mut s = DMatrix::zeros(d, d);
        for k in 0..self.n_levels() {
            let q = level_matrix(k)?;
            let members = &self.level_sets[k];
            for (a, &y) in members.iter().enumerate() {
                let w = self.level_length(k) / self.weights[y];
                for (b, &y2) in members.iter().enumerate() {
                    s[(y, y2)] += w * q[(a, b)];
                }
            }
        }
        let kernel = StochasticKernel::with_tolerance(s, ASSEMBLY_ROW_TOL)?;
        check_reversibility(kernel, self.target()?, REVERSIBILITY_TOL)
    }
}

/// Exact slice sampler: the next state is uniform on the level set.
pub fn slice_exact(model: &SliceModel) -> Result<ReversiblePair> {
    model.integrate(|k| {
        let g = model.level_sets[k].len();
        Ok(DMatrix::from_element(g, g, 1.0 / g as f64))
    })
}

/// Hybrid slice sampler: one step of the level kernel replaces the uniform draw.
pub fn slice_hybrid(model: &SliceModel) -> Result<ReversiblePair> {
    slice_hybrid_t(model, 1)
}

/// As [`slice_hybrid`] with every level kernel raised to the `t`-th power.
pub fn slice_hybrid_t(model: &SliceModel, t: usize) -> Result<ReversiblePair> {
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    model.integrate(|k| {
        let q = model.level_kernel(k).ok_or(Error::MissingLevelKernel(k))?;
        Ok(crate::spectral::t_step(q.kernel(), t)?.into_matrix())
    })
}
