//! Random models and small oracles shared by the integration tests.
#![allow(dead_code)]

use hybrid_gibbs::gibbs::random::{random_joint, random_reversible_matrix, random_sizes};
use hybrid_gibbs::gibbs::JointDistribution;
use hybrid_gibbs::spectral::{check_reversibility, FunctionVec, ProbVec, ReversiblePair, StochasticKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A joint with `2..=max_n` coordinates of `2..=max_d` values each.
pub fn joint<R: Rng>(rng: &mut R, max_n: usize, max_d: usize) -> JointDistribution {
    let n = rng.random_range(2..=max_n);
    let sizes = random_sizes(rng, n, max_d);
    random_joint(rng, &sizes).unwrap()
}

pub fn joint_with<R: Rng>(rng: &mut R, n: usize, max_d: usize) -> JointDistribution {
    let sizes = random_sizes(rng, n, max_d);
    random_joint(rng, &sizes).unwrap()
}

pub fn function<R: Rng>(rng: &mut R, len: usize) -> FunctionVec {
    FunctionVec::new((0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap()
}

pub fn prob<R: Rng>(rng: &mut R, len: usize) -> ProbVec {
    ProbVec::new((0..len).map(|_| 0.05 + rng.random::<f64>()).collect()).unwrap()
}

/// A random reversible kernel on `len` states with a random positive target.
pub fn reversible<R: Rng>(rng: &mut R, len: usize) -> ReversiblePair {
    let target = prob(rng, len);
    let m = random_reversible_matrix(rng, &target);
    check_reversibility(StochasticKernel::new(m).unwrap(), target, 1e-10).unwrap()
}

/// `⟨f₀, g₀⟩_ω` for centered copies of `f` and `g`, by direct summation.
pub fn centered_inner(omega: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let mf: f64 = omega.iter().zip(f).map(|(w, v)| w * v).sum();
    let mg: f64 = omega.iter().zip(g).map(|(w, v)| w * v).sum();
    omega.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w * (a - mf) * (b - mg)).sum()
}

/// `⟨f₀, K f₀⟩_ω / ‖f₀‖²_ω` by direct summation.
pub fn rayleigh(rev: &ReversiblePair, f: &[f64]) -> f64 {
    let omega = rev.stationary().as_slice();
    let mean: f64 = omega.iter().zip(f).map(|(w, v)| w * v).sum();
    let f0: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let k = rev.kernel().matrix();
    let n = f0.len();
    let mut num = 0.0;
    for x in 0..n {
        let kf: f64 = (0..n).map(|y| k[(x, y)] * f0[y]).sum();
        num += omega[x] * f0[x] * kf;
    }
    num / omega.iter().zip(&f0).map(|(w, v)| w * v * v).sum::<f64>()
}

/// `½ Σ ω(x)K(x,y)(f(x)−f(y))²` by direct summation.
pub fn dirichlet(rev: &ReversiblePair, f: &[f64]) -> f64 {
    let omega = rev.stationary().as_slice();
    let k = rev.kernel().matrix();
    let n = f.len();
    let mut sum = 0.0;
    for x in 0..n {
        for y in 0..n {
            sum += omega[x] * k[(x, y)] * (f[x] - f[y]).powi(2);
        }
    }
    0.5 * sum
}

pub fn max_entry_diff(a: &StochasticKernel, b: &StochasticKernel) -> f64 {
    (a.matrix() - b.matrix()).abs().max()
}
