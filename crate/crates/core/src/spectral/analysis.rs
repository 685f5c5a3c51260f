//! Exact L²(ω) spectral quantities of reversible kernels.
//!
//! For a pair `(K, ω)` in detailed balance the matrix
//! `A = D^{1/2} K D^{-1/2}` with `D = diag(ω)` is symmetric and shares its
//! spectrum with `K` acting on `L²(ω)`. The eigenvector along `sqrt(ω)`
//! carries the constant functions (eigenvalue 1); the remaining eigenpairs
//! describe `K` on the mean-zero subspace `L₀²(ω)`, which is where the
//! operator norm, the Dirichlet-form extremes and the asymptotic variance
//! live.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::kernel::t_step;
use super::prob::FunctionVec;
use super::reversible::ReversiblePair;
use crate::error::{Error, Result};
use crate::report::BoundReport;

/// States whose stationary mass falls below this are removed before analysis.
pub const NULL_MASS: f64 = 1e-14;
/// Smallest mean-zero eigenvalue still counted as nonnegative.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// `‖K‖_ω` on mean-zero functions.
    pub operator_norm: f64,
    /// Absolute spectral gap `1 − ‖K‖_ω`.
    pub gap: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub psd: bool,
    /// Mean-zero spectrum, ascending.
    pub eigenvalues: Vec<f64>,
    /// States removed because their stationary mass is below [`NULL_MASS`].
    pub dropped_states: Vec<usize>,
    /// Largest `|A − Aᵀ|/2` entry seen before symmetrization.
    pub max_asymmetry: f64,
}

impl SpectralSummary {
    /// True when the mean-zero subspace is trivial (a single supported state).
    pub fn is_trivial(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Mean-zero eigenpairs, with eigenvectors mapped back to functions on the
/// full state space (zero on dropped states) and normalized in `L²(ω)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub summary: SpectralSummary,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<FunctionVec>,
}

pub fn spectral_summary(rev: &ReversiblePair) -> Result<SpectralSummary> {
    Ok(spectral_decomposition(rev)?.summary)
}

pub fn spectral_decomposition(rev: &ReversiblePair) -> Result<SpectralDecomposition> {
    let omega = rev.stationary();
    let n = rev.n();
    let mut retained = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for x in 0..n {
        if omega.get(x) < NULL_MASS {
            dropped.push(x);
        } else {
            retained.push(x);
        }
    }
    let mass: f64 = retained.iter().map(|&x| omega.get(x)).sum();
    let weights: Vec<f64> = retained.iter().map(|&x| omega.get(x) / mass).collect();
    if let Some((i, &w)) = weights.iter().enumerate().find(|(_, &w)| w < NULL_MASS) {
        return Err(Error::SingularStationary { state: retained[i], weight: w });
    }
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let r = retained.len();
    let k = rev.kernel().matrix();
    let a = DMatrix::from_fn(r, r, |i, j| sqrt_w[i] * k[(retained[i], retained[j])] / sqrt_w[j]);
    let max_asymmetry = (&a - a.transpose()).abs().max() / 2.0;
    let sym = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let top = {
        let s = DVector::from_vec(sqrt_w.clone());
        (0..r)
            .max_by(|&i, &j| {
                let oi = eig.eigenvectors.column(i).dot(&s).abs();
                let oj = eig.eigenvectors.column(j).dot(&s).abs();
                oi.total_cmp(&oj)
            })
            .expect("at least one retained state")
    };

    let mut pairs: Vec<(f64, FunctionVec)> = (0..r)
        .filter(|&i| i != top)
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            let mut f = vec![0.0; n];
            for (pos, &x) in retained.iter().enumerate() {
                f[x] = v[pos] / sqrt_w[pos];
            }
            (eig.eigenvalues[i], FunctionVec::new(f).expect("finite eigenvector"))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();

    let (lambda_min, lambda_max) = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    };
    let operator_norm = lambda_max.abs().max(lambda_min.abs());
    let gap = 1.0 - operator_norm;
    // 1 − ‖K‖ = min(2 − sup E/‖f‖², inf E/‖f‖²) with E/‖f‖² ranging over 1 − λ.
    let via_dirichlet = (2.0 - (1.0 - lambda_min)).min(1.0 - lambda_max);
    if (via_dirichlet - gap).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "gap {gap} disagrees with Dirichlet characterization {via_dirichlet}"
        )));
    }
    let summary = SpectralSummary {
        operator_norm,
        gap,
        lambda_max,
        lambda_min,
        psd: lambda_min >= -PSD_TOL,
        eigenvalues: eigenvalues.clone(),
        dropped_states: dropped,
        max_asymmetry,
    };
    Ok(SpectralDecomposition {
        summary,
        eigenvalues,
        eigenfunctions: pairs.into_iter().map(|p| p.1).collect(),
    })
}

fn check_len(rev: &ReversiblePair, f: &FunctionVec) -> Result<()> {
    if f.len() != rev.n() {
        return Err(Error::DimensionMismatch { expected: rev.n(), found: f.len() });
    }
    Ok(())
}

/// `½ Σ ω(x)K(x,y)(f(x) − f(y))²`, cross-checked against
/// `‖f₀‖² − ⟨f₀, Kf₀⟩` for the centered `f₀`.
pub fn dirichlet_form(rev: &ReversiblePair, f: &FunctionVec) -> Result<f64> {
    check_len(rev, f)?;
    let omega = rev.stationary();
    let k = rev.kernel();
    let v = f.as_slice();
    let n = rev.n();
    let mut double_sum = 0.0;
    // Column-major storage: walk each column of K top to bottom.
    for (y, col) in k.matrix().column_iter().enumerate() {
        for x in 0..n {
            let d = v[x] - v[y];
            double_sum += omega.get(x) * col[x] * d * d;
        }
    }
    double_sum *= 0.5;

    let f0 = f.centered(omega)?;
    let kf0 = k.apply(f0.as_slice());
    let inner_form = omega.norm_sq(f0.as_slice()) - omega.inner(f0.as_slice(), &kf0);
    let scale = 1.0 + omega.norm_sq(f0.as_slice());
    if (double_sum - inner_form).abs() > 1e-10 * scale {
        return Err(Error::Inconsistent(format!(
            "Dirichlet form routes disagree: {double_sum} vs {inner_form}"
        )));
    }
    Ok(double_sum)
}

/// Extremes of `E_K(f)/‖f‖²` over nonzero mean-zero `f`: `(1 − λ_max, 1 − λ_min)`.
pub fn dirichlet_ratio_extrema(rev: &ReversiblePair) -> Result<(f64, f64)> {
    let s = spectral_summary(rev)?;
    Ok(ratio_extrema(&s))
}

pub(crate) fn ratio_extrema(s: &SpectralSummary) -> (f64, f64) {
    if s.is_trivial() {
        (1.0, 1.0)
    } else {
        (1.0 - s.lambda_max, 1.0 - s.lambda_min)
    }
}

/// `⟨f₀, Kf₀⟩_ω / ‖f₀‖²_ω` for the centered `f₀`; `None` when `f₀ = 0`.
pub fn rayleigh_quotient(rev: &ReversiblePair, f: &FunctionVec) -> Result<Option<f64>> {
    check_len(rev, f)?;
    let omega = rev.stationary();
    let f0 = f.centered(omega)?;
    let norm = omega.norm_sq(f0.as_slice());
    if norm <= 1e-300 {
        return Ok(None);
    }
    let kf0 = rev.kernel().apply(f0.as_slice());
    Ok(Some(omega.inner(f0.as_slice(), &kf0) / norm))
}

/// `var_K(f) = 2⟨f₀, (I − K)⁻¹ f₀⟩_ω − ‖f₀‖²_ω`.
///
/// The Poisson equation `(I − K)g = f₀` is solved on the stationary support
/// through the fundamental matrix `I − K + 1ωᵀ`, whose solution is the
/// mean-zero `g`.
pub fn asymptotic_variance(rev: &ReversiblePair, f: &FunctionVec) -> Result<f64> {
    Ok(asymptotic_variances(rev, std::slice::from_ref(f))?[0])
}

/// [`asymptotic_variance`] for several functions sharing one factorization.
pub fn asymptotic_variances(rev: &ReversiblePair, fs: &[FunctionVec]) -> Result<Vec<f64>> {
    for f in fs {
        check_len(rev, f)?;
    }
    let summary = spectral_summary(rev)?;
    if summary.operator_norm >= 1.0 - 1e-12 {
        return Err(Error::NoSpectralGap { norm: summary.operator_norm });
    }
    let omega = rev.stationary();
    let support: Vec<usize> = (0..rev.n()).filter(|&x| omega.get(x) >= NULL_MASS).collect();
    let r = support.len();
    let mass: f64 = support.iter().map(|&x| omega.get(x)).sum();
    let w: Vec<f64> = support.iter().map(|&x| omega.get(x) / mass).collect();
    let k = rev.kernel().matrix();
    let z = DMatrix::from_fn(r, r, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - k[(support[i], support[j])] + w[j]
    });
    let lu = z.lu();
    fs.iter()
        .map(|f| {
            let f0 = f.centered(omega)?;
            let rhs = DVector::from_iterator(r, support.iter().map(|&x| f0.as_slice()[x]));
            let g = lu.solve(&rhs).ok_or_else(|| Error::Inconsistent("fundamental matrix is singular".into()))?;
            let mut inner = 0.0;
            let mut norm = 0.0;
            for (i, &x) in support.iter().enumerate() {
                let fx = f0.as_slice()[x];
                inner += w[i] * fx * g[i];
                norm += w[i] * fx * fx;
            }
            Ok(2.0 * inner - norm)
        })
        .collect()
}

/// Checks `(⟨f₀,Kf₀⟩/‖f₀‖²)ᵗ <= ⟨f₀,Kᵗf₀⟩/‖f₀‖²` and the left side's sign.
pub fn spectral_jensen_check(rev: &ReversiblePair, f: &FunctionVec, t: usize) -> Result<BoundReport> {
    check_len(rev, f)?;
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be positive".into()));
    }
    if t % 2 == 1 && !spectral_summary(rev)?.psd {
        return Err(Error::PreconditionUnmet(format!(
            "t = {t} is odd and the kernel is not positive semi-definite"
        )));
    }
    let omega = rev.stationary();
    let f0 = f.centered(omega)?;
    let norm = omega.norm_sq(f0.as_slice());
    if norm <= 1e-300 {
        return Err(Error::ZeroFunction);
    }
    let q = omega.inner(f0.as_slice(), &rev.kernel().apply(f0.as_slice())) / norm;
    let kt = t_step(rev.kernel(), t)?;
    let rhs = omega.inner(f0.as_slice(), &kt.apply(f0.as_slice())) / norm;
    let lhs = q.powi(t as i32);
    let tol = 1e-10;
    let mut report = BoundReport::inequality(format!("spectral_jensen.t{t}"), lhs, rhs, tol);
    if lhs < -tol {
        report.pass = false;
        report.status = crate::report::Status::Fail;
        report.witness = Some(format!("negative left side {lhs}"));
    }
    Ok(report)
}
