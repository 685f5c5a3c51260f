use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{FunctionVec, ProbVec, NULL_MASS};

/// A labelled mean-zero test function of unit `L²(ω)` norm.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub label: String,
    pub f: FunctionVec,
}

/// Eigenfunctions of the relevant kernel followed by `trials` seeded
/// Gaussian directions, all centered and normalized.
pub fn test_functions(eigenfunctions: &[FunctionVec], omega: &ProbVec, trials: usize, seed: u64) -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> = eigenfunctions
        .iter()
        .enumerate()
        .filter_map(|(k, f)| normalized(f, omega).map(|f| TestFunction { label: format!("eigen[{k}]"), f }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = omega.len();
    for k in 0..trials {
        let values: Vec<f64> = (0..n)
            .map(|x| {
                let v: f64 = StandardNormal.sample(&mut rng);
                if omega.get(x) >= NULL_MASS {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        let f = FunctionVec::new(values).expect("finite normals");
        if let Some(f) = normalized(&f, omega) {
            out.push(TestFunction { label: format!("random[{k}]"), f });
        }
    }
    out
}

fn normalized(f: &FunctionVec, omega: &ProbVec) -> Option<FunctionVec> {
    let f0 = f.centered(omega).ok()?;
    let norm = omega.norm_sq(f0.as_slice()).sqrt();
    (norm > 1e-12).then(|| f0.scaled(1.0 / norm))
}
