//! Seeded random models for sweeps and property tests.

use nalgebra::DMatrix;
use rand::Rng;

use super::approx::{ApproxRule, ApproximatorSpec};
use super::joint::JointDistribution;
use super::scan::SelectionProbs;
use super::slice::SliceModel;
use super::space::ProductSpace;
use crate::error::Result;
use crate::spectral::ProbVec;

/// Strictly positive joint weights on a product space of the given sizes.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, sizes: &[usize]) -> Result<JointDistribution> {
    let space = ProductSpace::new(sizes.to_vec())?;
    let weights = (0..space.total()).map(|_| 0.02 + rng.random::<f64>().powi(2)).collect();
    JointDistribution::new(space, weights)
}

/// Random sizes: `n` coordinates, each with `2..=max_size` values.
pub fn random_sizes<R: Rng + ?Sized>(rng: &mut R, n: usize, max_size: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(2..=max_size.max(2))).collect()
}

/// Selection probabilities bounded away from zero.
pub fn random_selection<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SelectionProbs {
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / sum).collect();
    // Absorb rounding so the sum is exactly representable as 1.
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    SelectionProbs::new(p).expect("positive weights normalize")
}

/// A kernel reversible with respect to `target`, not necessarily psd.
///
/// Off-diagonal flow `S(a,b) = r_ab·min(π_a, π_b)` with symmetric uniform `r`,
/// scaled so that the busiest row has between zero and half its mass left on
/// the diagonal.
pub fn random_reversible_matrix<R: Rng + ?Sized>(rng: &mut R, target: &ProbVec) -> DMatrix<f64> {
    let d = target.len();
    let pi = target.as_slice();
    let mut flow = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in (a + 1)..d {
            let r = rng.random::<f64>() * pi[a].min(pi[b]);
            flow[(a, b)] = r;
            flow[(b, a)] = r;
        }
    }
    let busiest = (0..d)
        .filter(|&a| pi[a] > 0.0)
        .map(|a| flow.row(a).sum() / pi[a])
        .fold(0.0, f64::max);
    let scale = if busiest > 0.0 { busiest * (1.0 + rng.random::<f64>()) } else { 1.0 };
    let mut k = DMatrix::zeros(d, d);
    for a in 0..d {
        if pi[a] == 0.0 {
            k[(a, a)] = 1.0;
            continue;
        }
        let mut moved = 0.0;
        for b in 0..d {
            if a != b {
                k[(a, b)] = flow[(a, b)] / (pi[a] * scale);
                moved += k[(a, b)];
            }
        }
        k[(a, a)] = 1.0 - moved;
    }
    k
}

/// `εI + (1−ε)π` as a matrix.
pub fn lazy_matrix(target: &ProbVec, eps: f64) -> DMatrix<f64> {
    let d = target.len();
    DMatrix::from_fn(d, d, |a, b| if a == b { eps } else { 0.0 } + (1.0 - eps) * target.get(b))
}

/// Explicit approximators for every supported `(i, y)`: a random reversible
/// matrix, or a random lazy matrix with probability `lazy_share`.
pub fn random_explicit_spec<R: Rng + ?Sized>(
    rng: &mut R,
    joint: &JointDistribution,
    coords: &[usize],
    lazy_share: f64,
) -> Result<ApproximatorSpec> {
    let mut spec = ApproximatorSpec::exact();
    for &i in coords {
        spec = spec.with_override(i, ApproxRule::ExplicitMatrix);
        for fiber in joint.fibers(&[i])? {
            if fiber.mass <= 0.0 {
                continue;
            }
            let target = joint.conditional(i, &fiber.complement)?;
            let m = if rng.random::<f64>() < lazy_share {
                lazy_matrix(&target, rng.random::<f64>())
            } else {
                random_reversible_matrix(rng, &target)
            };
            spec = spec.with_explicit(i, fiber.complement, m);
        }
    }
    Ok(spec)
}

/// A slice model with `d` states, integer-ish weights and random lazy or
/// random-walk level kernels.
pub fn random_slice<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<SliceModel> {
    let weights = (0..d).map(|_| 0.5 + (rng.random::<f64>() * 4.0).floor()).collect();
    let mut model = SliceModel::new(weights)?;
    for k in 0..model.n_levels() {
        let rule = if rng.random::<bool>() {
            ApproxRule::Lazy { eps: rng.random::<f64>() * 0.95 }
        } else {
            ApproxRule::MetropolisRw { radius: 1 }
        };
        model = model.with_level_rule(k, &rule)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{check_reversibility, spectral_summary, StochasticKernel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_reversible_matrices_are_reversible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut saw_negative = false;
        for _ in 0..200 {
            let d = rng.random_range(2..6);
            let target = ProbVec::new((0..d).map(|_| 0.05 + rng.random::<f64>()).collect()).unwrap();
            let k = StochasticKernel::new(random_reversible_matrix(&mut rng, &target)).unwrap();
            let pair = check_reversibility(k, target, 1e-12).unwrap();
            saw_negative |= spectral_summary(&pair).unwrap().lambda_min < -1e-3;
        }
        assert!(saw_negative, "generator should produce some non-psd kernels");
    }

    #[test]
    fn selection_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let p = random_selection(&mut rng, n);
            assert_eq!(p.len(), n);
            assert!(p.as_slice().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn explicit_spec_covers_all_conditionals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = random_joint(&mut rng, &[3, 2]).unwrap();
        let spec = random_explicit_spec(&mut rng, &j, &[0, 1], 0.5).unwrap();
        assert_eq!(spec.explicit.len(), 2 + 3);
    }
}
