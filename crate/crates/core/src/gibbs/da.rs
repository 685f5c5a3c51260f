//! Two-block data augmentation: the marginal chain on coordinate 0 obtained by
//! drawing coordinate 1 given 0, then 0 given 1.

use nalgebra::DMatrix;

use super::approx::{approximator_for, ApproximatorSpec};
use super::joint::JointDistribution;
use super::scan::ASSEMBLY_ROW_TOL;
use crate::error::{Error, Result};
use crate::spectral::{check_reversibility, t_step, ProbVec, ReversiblePair, StochasticKernel, REVERSIBILITY_TOL};

pub(crate) fn require_two_blocks(joint: &JointDistribution) -> Result<()> {
    match joint.n_coords() {
        2 => Ok(()),
        n => Err(Error::NotTwoBlock(n)),
    }
}

/// Law of coordinate 1 given coordinate 0 equals `y`, for every `y` in the
/// support of the first marginal (`None` elsewhere).
pub fn augmentation_laws(joint: &JointDistribution) -> Result<Vec<Option<ProbVec>>> {
    require_two_blocks(joint)?;
    let m1 = joint.marginal(&[0])?;
    (0..m1.len()).map(|y| if m1.get(y) > 0.0 { joint.conditional(1, &[y]).map(Some) } else { Ok(None) }).collect()
}

/// Sums `Π_{2,y}(z) · inner(z)(y, ·)` over `z`; unsupported `y` hold still.
fn mix(joint: &JointDistribution, mut inner: impl FnMut(usize) -> Result<DMatrix<f64>>) -> Result<ReversiblePair> {
    let laws = augmentation_laws(joint)?;
    let d1 = laws.len();
    let d2 = joint.space().sizes()[1];
    let mut cache: Vec<Option<DMatrix<f64>>> = vec![None; d2];
    let mut s = DMatrix::zeros(d1, d1);
    for (y, law) in laws.iter().enumerate() {
        let Some(law) = law else {
            s[(y, y)] = 1.0;
            continue;
        };
        for z in law.support() {
            if cache[z].is_none() {
                cache[z] = Some(inner(z)?);
            }
            let q = cache[z].as_ref().expect("cached above");
            let w = law.get(z);
            for y2 in 0..d1 {
                s[(y, y2)] += w * q[(y, y2)];
            }
        }
    }
    let kernel = StochasticKernel::with_tolerance(s, ASSEMBLY_ROW_TOL)?;
    check_reversibility(kernel, joint.marginal(&[0])?, REVERSIBILITY_TOL)
}

/// Exact data augmentation kernel `S(y, y′) = Σ_z Π_{2,y}(z) Π_{1,z}(y′)`.
pub fn da_exact(joint: &JointDistribution) -> Result<ReversiblePair> {
    mix(joint, |z| {
        let target = joint.conditional(0, &[z])?;
        let d = target.len();
        Ok(DMatrix::from_fn(d, d, |_, b| target.get(b)))
    })
}

/// The approximating kernel `Q_{1,z}` for the coordinate-0 update.
pub fn da_approximator(joint: &JointDistribution, spec: &ApproximatorSpec, z: usize) -> Result<ReversiblePair> {
    require_two_blocks(joint)?;
    approximator_for(spec, 0, &[z], &joint.conditional(0, &[z])?)
}

/// Hybrid data augmentation `Ŝ(y, y′) = Σ_z Π_{2,y}(z) Q_{1,z}(y, y′)`.
pub fn da_hybrid(joint: &JointDistribution, spec: &ApproximatorSpec) -> Result<ReversiblePair> {
    da_hybrid_t(joint, spec, 1)
}

/// `Ŝ_t`: as [`da_hybrid`] with `Q_{1,z}` replaced by its `t`-th power.
pub fn da_hybrid_t(joint: &JointDistribution, spec: &ApproximatorSpec, t: usize) -> Result<ReversiblePair> {
    require_two_blocks(joint)?;
    spec.validate()?;
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    mix(joint, |z| {
        let q = da_approximator(joint, spec, z)?;
        Ok(if t == 1 { q.kernel().matrix().clone() } else { t_step(q.kernel(), t)?.into_matrix() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::approx::ApproxRule;
    use crate::gibbs::space::ProductSpace;
    use crate::spectral::spectral_summary;

    fn joint_2x2() -> JointDistribution {
        JointDistribution::new(ProductSpace::new(vec![2, 2]).unwrap(), vec![0.1, 0.2, 0.3, 0.4]).unwrap()
    }

    fn joint_3x2() -> JointDistribution {
        JointDistribution::new(ProductSpace::new(vec![3, 2]).unwrap(), vec![0.1, 0.2, 0.3, 0.15, 0.05, 0.2]).unwrap()
    }

    #[test]
    fn independent_joint_gives_independence_kernel() {
        let j = JointDistribution::product(&[vec![1.0, 2.0, 1.0], vec![3.0, 1.0]]).unwrap();
        let s = da_exact(&j).unwrap();
        assert!(spectral_summary(&s).unwrap().operator_norm < 1e-12);
        for y in 0..3 {
            assert!((s.kernel().get(y, 1) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_matches_hand_product() {
        // Π(y, z) with y = coordinate 0: Π(0,0)=0.1, Π(1,0)=0.2, Π(0,1)=0.3, Π(1,1)=0.4.
        let s = da_exact(&joint_2x2()).unwrap();
        let p2_given_y = [[0.25, 0.75], [1.0 / 3.0, 2.0 / 3.0]];
        let p1_given_z = [[1.0 / 3.0, 2.0 / 3.0], [3.0 / 7.0, 4.0 / 7.0]];
        for y in 0..2 {
            for y2 in 0..2 {
                let oracle: f64 = (0..2).map(|z| p2_given_y[y][z] * p1_given_z[z][y2]).sum();
                assert!((s.kernel().get(y, y2) - oracle).abs() < 1e-15);
            }
        }
        let sum = spectral_summary(&s).unwrap();
        assert!(sum.psd);
        // Two states: the mean-zero eigenvalue is 1 − S(0,1) − S(1,0).
        let lambda = 1.0 - s.kernel().get(0, 1) - s.kernel().get(1, 0);
        assert!((sum.operator_norm - lambda.abs()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_joint_is_frozen() {
        let j = JointDistribution::new(ProductSpace::new(vec![2, 2]).unwrap(), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let s = da_exact(&j).unwrap();
        assert!((s.kernel().matrix() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-15);
        assert!(spectral_summary(&s).unwrap().gap.abs() < 1e-12);
    }

    #[test]
    fn hybrid_variants() {
        let j = joint_3x2();
        let s = da_exact(&j).unwrap();
        let exact = da_hybrid(&j, &ApproximatorSpec::exact()).unwrap();
        assert!((exact.kernel().matrix() - s.kernel().matrix()).abs().max() < 1e-14);

        let lazy = da_hybrid(&j, &ApproximatorSpec::lazy(0.4)).unwrap();
        let affine = DMatrix::identity(3, 3) * 0.4 + s.kernel().matrix() * 0.6;
        assert!((lazy.kernel().matrix() - affine).abs().max() < 1e-12);
        let gs = spectral_summary(&s).unwrap().gap;
        assert!((spectral_summary(&lazy).unwrap().gap - 0.6 * gs).abs() < 1e-10);

        let t1 = da_hybrid_t(&j, &ApproximatorSpec::lazy(0.4), 1).unwrap();
        assert!((t1.kernel().matrix() - lazy.kernel().matrix()).abs().max() < 1e-14);
        let t2 = da_hybrid_t(&j, &ApproximatorSpec::lazy(0.4), 2).unwrap();
        let affine2 = DMatrix::identity(3, 3) * 0.16 + s.kernel().matrix() * 0.84;
        assert!((t2.kernel().matrix() - affine2).abs().max() < 1e-12);
        let t4 = da_hybrid_t(&j, &ApproximatorSpec::uniform(ApproxRule::MetropolisRw { radius: 1 }), 4).unwrap();
        assert!(t4.reversibility_defect() < 1e-10);
    }

    #[test]
    fn explicit_matrices_per_z() {
        let j = joint_2x2();
        let mut spec = ApproximatorSpec::uniform(ApproxRule::ExplicitMatrix);
        for z in 0..2 {
            let pi = j.conditional(0, &[z]).unwrap();
            // Metropolis move to the other state, reversible by construction.
            let (a, b) = (pi.get(0), pi.get(1));
            let m = DMatrix::from_row_slice(2, 2, &[1.0 - (b / a).min(1.0) * 0.9, (b / a).min(1.0) * 0.9, (a / b).min(1.0) * 0.9, 1.0 - (a / b).min(1.0) * 0.9]);
            spec = spec.with_explicit(0, vec![z], m);
        }
        let sh = da_hybrid(&j, &spec).unwrap();
        assert!(sh.reversibility_defect() <= 1e-10);
    }

    #[test]
    fn more_than_two_blocks_is_rejected() {
        let j = JointDistribution::product(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(da_exact(&j), Err(Error::NotTwoBlock(3))));
        assert!(matches!(da_hybrid(&j, &ApproximatorSpec::exact()), Err(Error::NotTwoBlock(3))));
    }
}
