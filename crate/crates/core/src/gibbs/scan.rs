use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::approx::{approximator_for, ApproximatorSpec};
use super::joint::{Fiber, JointDistribution};
use crate::error::{Error, Result};
use crate::spectral::{check_reversibility, ProbVec, ReversiblePair, StochasticKernel, REVERSIBILITY_TOL};

/// Row tolerance for kernels assembled from many small products.
pub(crate) const ASSEMBLY_ROW_TOL: f64 = 1e-10;

/// Coordinate selection probabilities `(p₀, …, p_{n−1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SelectionProbs {
    p: Vec<f64>,
}

impl SelectionProbs {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("empty selection vector".into()));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidProbability(format!("selection probability {v}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability(format!("selection probabilities sum to {sum}")));
        }
        Ok(SelectionProbs { p: p.into_iter().map(|v| v / sum).collect() })
    }

    pub fn uniform(n: usize) -> Self {
        SelectionProbs { p: vec![1.0 / n as f64; n] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.p.len() as f64;
        self.p.iter().all(|v| (v - u).abs() <= 1e-12)
    }
}

impl TryFrom<Vec<f64>> for SelectionProbs {
    type Error = Error;
    fn try_from(p: Vec<f64>) -> Result<Self> {
        SelectionProbs::new(p)
    }
}

impl From<SelectionProbs> for Vec<f64> {
    fn from(p: SelectionProbs) -> Self {
        p.p
    }
}

/// Sums `weight · local(block, fiber)` over blocks and fibers, then verifies
/// reversibility against the joint. Zero-mass fibers hold still.
pub(crate) fn assemble(
    joint: &JointDistribution,
    blocks: &[(Vec<usize>, f64)],
    mut local: impl FnMut(usize, &Fiber) -> Result<DMatrix<f64>>,
) -> Result<ReversiblePair> {
    let n = joint.total();
    let mut k = DMatrix::zeros(n, n);
    for (b, (block, weight)) in blocks.iter().enumerate() {
        if *weight == 0.0 {
            continue;
        }
        for fiber in joint.fibers(block)? {
            if fiber.mass <= 0.0 {
                for &x in &fiber.members {
                    k[(x, x)] += weight;
                }
                continue;
            }
            let m = local(b, &fiber)?;
            for (a, &x) in fiber.members.iter().enumerate() {
                for (c, &y) in fiber.members.iter().enumerate() {
                    k[(x, y)] += weight * m[(a, c)];
                }
            }
        }
    }
    let kernel = StochasticKernel::with_tolerance(k, ASSEMBLY_ROW_TOL)?;
    check_reversibility(kernel, joint.weights().clone(), REVERSIBILITY_TOL)
}

pub(crate) fn fiber_target(joint: &JointDistribution, fiber: &Fiber) -> Result<ProbVec> {
    ProbVec::new(fiber.members.iter().map(|&x| joint.weights().get(x)).collect())
}

fn independence_block(target: &ProbVec) -> DMatrix<f64> {
    let d = target.len();
    DMatrix::from_fn(d, d, |_, c| target.get(c))
}

fn check_selection(joint: &JointDistribution, p: &SelectionProbs) -> Result<()> {
    if p.len() != joint.n_coords() {
        return Err(Error::DimensionMismatch { expected: joint.n_coords(), found: p.len() });
    }
    Ok(())
}

fn single_blocks(p: &SelectionProbs) -> Vec<(Vec<usize>, f64)> {
    p.as_slice().iter().enumerate().map(|(i, &w)| (vec![i], w)).collect()
}

/// Random-scan Gibbs kernel `T`.
pub fn exact_random_scan(joint: &JointDistribution, p: &SelectionProbs) -> Result<ReversiblePair> {
    check_selection(joint, p)?;
    assemble(joint, &single_blocks(p), |_, fiber| Ok(independence_block(&fiber_target(joint, fiber)?)))
}

/// Hybrid random-scan kernel `T̂`: coordinate `i` moves by one step of `Q_{i,y}`.
pub fn hybrid_random_scan(
    joint: &JointDistribution,
    p: &SelectionProbs,
    spec: &ApproximatorSpec,
) -> Result<ReversiblePair> {
    check_selection(joint, p)?;
    spec.validate()?;
    let blocks = single_blocks(p);
    assemble(joint, &blocks, |b, fiber| {
        let target = fiber_target(joint, fiber)?;
        Ok(approximator_for(spec, blocks[b].0[0], &fiber.complement, &target)?.kernel().matrix().clone())
    })
}

/// All `ℓ`-subsets of the coordinates, each with weight `1/C(n, ℓ)`.
pub(crate) fn uniform_blocks(n: usize, size: usize) -> Vec<(Vec<usize>, f64)> {
    let subsets: Vec<Vec<usize>> = (0..n).combinations(size).collect();
    let w = 1.0 / subsets.len() as f64;
    subsets.into_iter().map(|s| (s, w)).collect()
}

fn check_block_size(n: usize, size: usize) -> Result<()> {
    if size == 0 || size >= n {
        return Err(Error::InvalidBlockSize {
            size,
            coords: n,
            reason: format!("block size must lie in 1..={}", n.saturating_sub(1)),
        });
    }
    Ok(())
}

/// Block random-scan kernel `T_ℓ`: a uniformly chosen `ℓ`-subset is redrawn
/// from its joint conditional.
pub fn block_random_scan(joint: &JointDistribution, size: usize) -> Result<ReversiblePair> {
    check_block_size(joint.n_coords(), size)?;
    assemble(joint, &uniform_blocks(joint.n_coords(), size), |_, fiber| {
        Ok(independence_block(&fiber_target(joint, fiber)?))
    })
}

/// `Q_{Λ,y}`: random scan over the `m`-subsets of `block`, targeting the
/// conditional law of the block given `complement`.
pub fn inner_block_kernel(
    joint: &JointDistribution,
    block: &[usize],
    complement: &[usize],
    inner: usize,
) -> Result<ReversiblePair> {
    let sub = joint.block_conditional(block, complement)?;
    block_random_scan(&sub, inner)
}

/// `T_ℓ` with every block update replaced by `Q_{Λ,y}` of inner size `m`.
///
/// Averaging the inner kernels over uniformly random `ℓ`-subsets recovers
/// `T_m` exactly.
pub fn block_hybrid_scan(joint: &JointDistribution, outer: usize, inner: usize) -> Result<ReversiblePair> {
    let n = joint.n_coords();
    check_block_size(n, outer)?;
    check_block_size(outer, inner)?;
    let blocks = uniform_blocks(n, outer);
    assemble(joint, &blocks, |b, fiber| {
        Ok(inner_block_kernel(joint, &blocks[b].0, &fiber.complement, inner)?.kernel().matrix().clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::approx::ApproxRule;
    use crate::gibbs::space::ProductSpace;
    use crate::spectral::spectral_summary;

    fn coins(n: usize) -> JointDistribution {
        JointDistribution::product(&vec![vec![1.0, 1.0]; n]).unwrap()
    }

    fn joint_2x2() -> JointDistribution {
        JointDistribution::new(ProductSpace::new(vec![2, 2]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap()
    }

    fn norm(pair: &ReversiblePair) -> f64 {
        spectral_summary(pair).unwrap().operator_norm
    }

    #[test]
    fn selection_probs_validation() {
        assert!(SelectionProbs::new(vec![0.5, 0.6]).is_err());
        assert!(SelectionProbs::new(vec![-0.1, 1.1]).is_err());
        assert!(SelectionProbs::new(vec![]).is_err());
        assert!(SelectionProbs::new(vec![0.75, 0.25]).is_ok());
        assert!(SelectionProbs::uniform(3).is_uniform());
        assert!(!SelectionProbs::new(vec![0.75, 0.25]).unwrap().is_uniform());
    }

    #[test]
    fn two_coins() {
        let t = exact_random_scan(&coins(2), &SelectionProbs::uniform(2)).unwrap();
        assert!((norm(&t) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_coordinate_is_independence() {
        let j = JointDistribution::product(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let t = exact_random_scan(&j, &SelectionProbs::uniform(1)).unwrap();
        let s = spectral_summary(&t).unwrap();
        assert!(s.operator_norm < 1e-12 && (s.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlated_joint_is_psd_and_reversible() {
        let t = exact_random_scan(&joint_2x2(), &SelectionProbs::uniform(2)).unwrap();
        assert!(t.reversibility_defect() <= 1e-12);
        assert!(spectral_summary(&t).unwrap().psd);
    }

    #[test]
    fn hybrid_with_exact_rule_matches_exact() {
        let j = joint_2x2();
        let p = SelectionProbs::new(vec![0.3, 0.7]).unwrap();
        let t = exact_random_scan(&j, &p).unwrap();
        let th = hybrid_random_scan(&j, &p, &ApproximatorSpec::exact()).unwrap();
        assert!((t.kernel().matrix() - th.kernel().matrix()).abs().max() <= 1e-14);
    }

    #[test]
    fn lazy_hybrid_is_affine_in_exact() {
        let j = joint_2x2();
        let p = SelectionProbs::uniform(2);
        let t = exact_random_scan(&j, &p).unwrap();
        let th = hybrid_random_scan(&j, &p, &ApproximatorSpec::lazy(0.3)).unwrap();
        let expected = DMatrix::identity(4, 4) * 0.3 + t.kernel().matrix() * 0.7;
        assert!((th.kernel().matrix() - expected).abs().max() <= 1e-12);
        assert!(((1.0 - norm(&th)) - 0.7 * (1.0 - norm(&t))).abs() < 1e-10);
    }

    #[test]
    fn lazy_on_one_coordinate_only() {
        let spec = ApproximatorSpec::exact().with_override(0, ApproxRule::Lazy { eps: 0.5 });
        let th = hybrid_random_scan(&coins(2), &SelectionProbs::uniform(2), &spec).unwrap();
        assert!(spectral_summary(&th).unwrap().psd);
    }

    #[test]
    fn three_coin_blocks() {
        let j = coins(3);
        assert!((norm(&block_random_scan(&j, 1).unwrap()) - 2.0 / 3.0).abs() < 1e-12);
        assert!((norm(&block_random_scan(&j, 2).unwrap()) - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(block_random_scan(&j, 3), Err(Error::InvalidBlockSize { .. })));
        assert!(matches!(block_random_scan(&j, 0), Err(Error::InvalidBlockSize { .. })));
    }

    #[test]
    fn block_of_size_one_is_uniform_random_scan() {
        let j = joint_2x2();
        let a = block_random_scan(&j, 1).unwrap();
        let b = exact_random_scan(&j, &SelectionProbs::uniform(2)).unwrap();
        assert!((a.kernel().matrix() - b.kernel().matrix()).abs().max() <= 1e-15);
    }

    #[test]
    fn inner_block_kernels() {
        let q = inner_block_kernel(&coins(3), &[0, 1], &[0], 1).unwrap();
        assert!((spectral_summary(&q).unwrap().gap - 0.5).abs() < 1e-12);

        let diag = JointDistribution::new(
            ProductSpace::new(vec![2, 2, 2]).unwrap(),
            vec![0.2, 0.0, 0.0, 0.3, 0.1, 0.0, 0.0, 0.4],
        )
        .unwrap();
        let q = inner_block_kernel(&diag, &[0, 1], &[1], 1).unwrap();
        assert!(spectral_summary(&q).unwrap().gap.abs() < 1e-12);

        let j = JointDistribution::new(ProductSpace::new(vec![2, 2, 2]).unwrap(), (1..=8).map(|v| v as f64).collect())
            .unwrap();
        let q = inner_block_kernel(&j, &[1, 2], &[0], 1).unwrap();
        assert!(q.reversibility_defect() <= 1e-10);
        assert!(inner_block_kernel(&j, &[1, 2], &[0], 2).is_err());
    }

    #[test]
    fn averaged_inner_kernels_recover_smaller_blocks() {
        let j = JointDistribution::new(ProductSpace::new(vec![2, 3, 2]).unwrap(), (1..=12).map(|v| v as f64).collect())
            .unwrap();
        let nested = block_hybrid_scan(&j, 2, 1).unwrap();
        let direct = block_random_scan(&j, 1).unwrap();
        assert!((nested.kernel().matrix() - direct.kernel().matrix()).abs().max() <= 1e-12);
    }

    #[test]
    fn selection_length_mismatch() {
        assert!(matches!(
            exact_random_scan(&coins(2), &SelectionProbs::uniform(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
