//! Bounds for hybrid data augmentation and hybrid slice samplers.

use serde::{Deserialize, Serialize};

use super::battery::test_functions;
use super::quality::{ApproxQuality, ConditionalQuality};
use super::{stamp, CheckOptions, GAP_FLOOR};
use crate::error::{Error, Result};
use crate::gibbs::da::{augmentation_laws, require_two_blocks};
use crate::gibbs::{
    da_approximator, da_exact, da_hybrid, da_hybrid_t, slice_exact, slice_hybrid, slice_hybrid_t, ApproximatorSpec,
    JointDistribution, SliceModel,
};
use crate::report::{BoundReport, WorstCase};
use crate::spectral::{
    asymptotic_variances, rayleigh_quotient, spectral_decomposition, spectral_summary, FunctionVec, ReversiblePair,
    SpectralSummary,
};

/// Slack allowed when checking a dominating function against exact norms.
const GAMMA_TOL: f64 = 1e-10;

/// `(auxiliary value, P(value | y))` pairs with positive mass.
pub type MixingLaw = Vec<(usize, f64)>;

/// A two-block sampler: a joint on `(y, z)` with approximators for the
/// `y`-update, or a slice model whose auxiliary variable is the level.
#[derive(Debug, Clone, Copy)]
pub enum DaModel<'a> {
    Joint { joint: &'a JointDistribution, spec: &'a ApproximatorSpec },
    Slice(&'a SliceModel),
}

impl DaModel<'_> {
    pub fn exact(&self) -> Result<ReversiblePair> {
        match self {
            DaModel::Joint { joint, .. } => da_exact(joint),
            DaModel::Slice(m) => slice_exact(m),
        }
    }

    pub fn hybrid(&self) -> Result<ReversiblePair> {
        match self {
            DaModel::Joint { joint, spec } => da_hybrid(joint, spec),
            DaModel::Slice(m) => slice_hybrid(m),
        }
    }

    pub fn hybrid_t(&self, t: usize) -> Result<ReversiblePair> {
        match self {
            DaModel::Joint { joint, spec } => da_hybrid_t(joint, spec, t),
            DaModel::Slice(m) => slice_hybrid_t(m, t),
        }
    }

    /// Number of auxiliary values `z` (levels, for slice models).
    pub fn n_aux(&self) -> usize {
        match self {
            DaModel::Joint { joint, .. } => joint.space().sizes()[1],
            DaModel::Slice(m) => m.n_levels(),
        }
    }

    /// For each `y` in the support of the first marginal, the law of `z`
    /// given `y` as `(z, probability)` pairs; `None` off the support.
    pub fn mixing(&self) -> Result<Vec<Option<MixingLaw>>> {
        match self {
            DaModel::Joint { joint, .. } => Ok(augmentation_laws(joint)?
                .into_iter()
                .map(|law| law.map(|l| l.support().into_iter().map(|z| (z, l.get(z))).collect()))
                .collect()),
            DaModel::Slice(m) => Ok((0..m.n_states()).map(|y| Some(m.level_law(y))).collect()),
        }
    }

    /// Spectral summary of `Q_{1,z}` for every supported `z`.
    pub fn approximator_summaries(&self) -> Result<Vec<Option<SpectralSummary>>> {
        match self {
            DaModel::Joint { joint, spec } => {
                require_two_blocks(joint)?;
                let m2 = joint.marginal(&[1])?;
                (0..self.n_aux())
                    .map(|z| {
                        if m2.get(z) > 0.0 {
                            Ok(Some(spectral_summary(&da_approximator(joint, spec, z)?)?))
                        } else {
                            Ok(None)
                        }
                    })
                    .collect()
            }
            DaModel::Slice(m) => (0..m.n_levels())
                .map(|k| {
                    let q = m.level_kernel(k).ok_or(Error::MissingLevelKernel(k))?;
                    Ok(Some(spectral_summary(q)?))
                })
                .collect(),
        }
    }

    fn fingerprint(&self) -> String {
        match self {
            DaModel::Joint { joint, .. } => joint.fingerprint(),
            DaModel::Slice(m) => crate::report::fingerprint_floats("slice", m.weights()),
        }
    }
}

/// Approximation constants over the `Q_{1,z}` of a two-block model.
pub fn da_quality(model: &DaModel<'_>) -> Result<ApproxQuality> {
    let table = model
        .approximator_summaries()?
        .iter()
        .enumerate()
        .filter_map(|(z, s)| s.as_ref().map(|s| ConditionalQuality::from_summary(0, vec![z], s)))
        .collect();
    Ok(ApproxQuality::aggregate(table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    /// The exact norms `‖Q_{1,z}‖`.
    Exact,
    /// A user-supplied dominating function.
    Supplied,
}

/// A function `γ(z) ∈ [0, 1]` dominating `‖Q_{1,z}‖`, one value per `z` (or
/// per level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaProfile {
    pub values: Vec<f64>,
    pub source: GammaSource,
}

impl GammaProfile {
    pub fn exact(model: &DaModel<'_>) -> Result<Self> {
        let values =
            model.approximator_summaries()?.iter().map(|s| s.as_ref().map_or(0.0, |s| s.operator_norm)).collect();
        Ok(GammaProfile { values, source: GammaSource::Exact })
    }

    pub fn supplied(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidSpec(format!("gamma value {v} outside [0, 1]")));
        }
        Ok(GammaProfile { values, source: GammaSource::Supplied })
    }

    /// Checks `‖Q_{1,z}‖ ≤ γ(z) + 1e-10` for every supported `z`.
    pub fn validate(&self, model: &DaModel<'_>) -> Result<()> {
        if self.values.len() != model.n_aux() {
            return Err(Error::DimensionMismatch { expected: model.n_aux(), found: self.values.len() });
        }
        for (z, s) in model.approximator_summaries()?.iter().enumerate() {
            if let Some(s) = s {
                if self.values[z] < s.operator_norm - GAMMA_TOL {
                    return Err(Error::GammaDominationViolated { z, gamma: self.values[z], norm: s.operator_norm });
                }
            }
        }
        Ok(())
    }

    /// `max_y Σ_z P(z | y)·g(γ(z))` over supported `y`.
    fn worst_average(&self, model: &DaModel<'_>, g: impl Fn(f64) -> f64) -> Result<f64> {
        self.validate(model)?;
        Ok(model
            .mixing()?
            .iter()
            .flatten()
            .map(|law| law.iter().map(|&(z, w)| w * g(self.values[z])).sum::<f64>())
            .fold(0.0, f64::max))
    }
}

/// `α_t = max_y Σ_z P(z | y)·γ(z)ᵗ`.
pub fn alpha_t(model: &DaModel<'_>, gamma: &GammaProfile, t: usize) -> Result<f64> {
    gamma.worst_average(model, |g| g.powi(t as i32))
}

/// `β_t = max_y (Σ_z P(z | y)·γ(z)^{2t})^{1/2}`; never below `α_t`.
pub fn beta_t(model: &DaModel<'_>, gamma: &GammaProfile, t: usize) -> Result<f64> {
    let beta = gamma.worst_average(model, |g| g.powi(2 * t as i32))?.sqrt();
    let alpha = alpha_t(model, gamma, t)?;
    if alpha > beta + 1e-12 {
        return Err(Error::Inconsistent(format!("alpha_t {alpha} exceeds beta_t {beta}")));
    }
    Ok(beta)
}

/// `(1−C)(1−‖S‖) ≤ 1−‖Ŝ‖ ≤ (1+C)(1−‖S‖)`, tightened to `1−‖S‖` when every
/// `Q_{1,z}` is psd.
pub fn check_da_sandwich(joint: &JointDistribution, spec: &ApproximatorSpec, tol: f64) -> Result<Vec<BoundReport>> {
    require_two_blocks(joint)?;
    let model = DaModel::Joint { joint, spec };
    let q = da_quality(&model)?;
    let gap = spectral_summary(&model.exact()?)?.gap;
    let gap_h = spectral_summary(&model.hybrid()?)?.gap;
    let mut reports = vec![
        BoundReport::inequality("da_sandwich.lower", (1.0 - q.c) * gap, gap_h, tol),
        BoundReport::inequality("da_sandwich.upper", gap_h, (1.0 + q.c) * gap, tol),
    ];
    reports.push(if q.all_psd {
        BoundReport::inequality("da_sandwich.psd_upper", gap_h, gap, tol)
    } else {
        BoundReport::hypothesis_unmet("da_sandwich.psd_upper", "some approximating kernel is not psd", tol)
    });
    Ok(stamp(reports, &model.fingerprint()))
}

fn tstep_hypothesis(q: &ApproxQuality, t: usize) -> Option<String> {
    (t % 2 == 1 && !q.all_psd).then(|| format!("t = {t} is odd and some approximating kernel is not psd"))
}

/// The t-step comparison for hybrid data augmentation, with the exact
/// `α_t` of the model's own norms.
///
/// * `da_tstep.t{t}.functional`: `(⟨f,Ŝf⟩/‖f‖²)ᵗ ≤ ⟨f,Sf⟩/‖f‖² + α_t` over
///   the eigenfunctions of `Ŝ` and random functions;
/// * `da_tstep.t{t}.nonneg`: `0 ≤ (⟨f,Ŝf⟩/‖f‖²)ᵗ` over the same battery;
/// * `da_tstep.t{t}.bernoulli`: `1−‖Ŝ‖ᵗ ≤ t(1−‖Ŝ‖)`;
/// * `da_tstep.t{t}.chain`: `1−‖S‖−α_t ≤ 1−‖Ŝ‖ᵗ`;
/// * `da_tstep.t{t}.alpha_beta`: `α_t ≤ β_t`.
pub fn check_da_tstep(model: &DaModel<'_>, t: usize, opts: CheckOptions) -> Result<Vec<BoundReport>> {
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    let name = |s: &str| format!("da_tstep.t{t}.{s}");
    let q = da_quality(model)?;
    let gamma = GammaProfile::exact(model)?;
    let alpha = alpha_t(model, &gamma, t)?;
    let beta = beta_t(model, &gamma, t)?;
    let mut reports = vec![BoundReport::inequality(name("alpha_beta"), alpha, beta, 1e-12)];
    if let Some(reason) = tstep_hypothesis(&q, t) {
        for s in ["functional", "nonneg", "bernoulli", "chain"] {
            reports.push(BoundReport::hypothesis_unmet(name(s), reason.clone(), opts.tol));
        }
        return Ok(stamp(reports, &model.fingerprint()));
    }
    let s = model.exact()?;
    let sh = model.hybrid()?;
    let dec = spectral_decomposition(&sh)?;
    let fs = test_functions(&dec.eigenfunctions, sh.stationary(), opts.trials, opts.seed);
    let mut functional = WorstCase::new(name("functional"), opts.tol);
    let mut nonneg = WorstCase::new(name("nonneg"), opts.tol);
    for tf in &fs {
        let (Some(rh), Some(r)) = (rayleigh_quotient(&sh, &tf.f)?, rayleigh_quotient(&s, &tf.f)?) else {
            continue;
        };
        let lhs = rh.powi(t as i32);
        functional.observe(lhs, r + alpha, || tf.label.clone());
        nonneg.observe(0.0, lhs, || tf.label.clone());
    }
    reports.push(functional.finish());
    reports.push(nonneg.finish());
    let norm = spectral_summary(&s)?.operator_norm;
    let norm_h = dec.summary.operator_norm;
    let chain_mid = 1.0 - norm_h.powi(t as i32);
    reports.push(BoundReport::inequality(name("bernoulli"), chain_mid, t as f64 * (1.0 - norm_h), opts.tol));
    reports.push(
        BoundReport::inequality(name("chain"), 1.0 - norm - alpha, chain_mid, opts.tol)
            .with_witness(format!("alpha_t = {alpha}")),
    );
    Ok(stamp(reports, &model.fingerprint()))
}

/// `var_Ŝ(f) ≤ 2t·var_S(f) + (2t−1)‖f‖²` when `α_t ≤ (1−‖S‖)/2`, `‖S‖ < 1`
/// and the t-step hypothesis (even `t` or psd approximators) holds.
pub fn check_da_variance_t(model: &DaModel<'_>, t: usize, opts: CheckOptions) -> Result<Vec<BoundReport>> {
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    let name = format!("da_variance.t{t}");
    let unmet = |reason: String| Ok(stamp(vec![BoundReport::hypothesis_unmet(&name, reason, opts.tol)], &model.fingerprint()));
    let q = da_quality(model)?;
    if let Some(reason) = tstep_hypothesis(&q, t) {
        return unmet(reason);
    }
    let s = model.exact()?;
    let dec = spectral_decomposition(&s)?;
    let gap = dec.summary.gap;
    if gap <= GAP_FLOOR {
        return unmet("exact kernel has no spectral gap".into());
    }
    let alpha = alpha_t(model, &GammaProfile::exact(model)?, t)?;
    if alpha > gap / 2.0 {
        return unmet(format!("alpha_t = {alpha} exceeds (1 - ‖S‖)/2 = {}", gap / 2.0));
    }
    let sh = model.hybrid()?;
    let fs = test_functions(&dec.eigenfunctions, s.stationary(), opts.trials, opts.seed);
    let funcs: Vec<FunctionVec> = fs.iter().map(|tf| tf.f.clone()).collect();
    let var = asymptotic_variances(&s, &funcs)?;
    let var_h = asymptotic_variances(&sh, &funcs)?;
    let w = s.stationary();
    let tt = 2.0 * t as f64;
    let mut worst = WorstCase::relative(&name, opts.tol);
    for (k, tf) in fs.iter().enumerate() {
        let norm = w.norm_sq(tf.f.centered(w)?.as_slice());
        worst.observe(var_h[k], tt * var[k] + (tt - 1.0) * norm, || tf.label.clone());
    }
    Ok(stamp(vec![worst.finish()], &model.fingerprint()))
}

/// `(1−‖S‖−α_t)/t ≤ 1−‖Ŝ‖ ≤ 1−‖S‖` for a slice model, with the weaker
/// `β_t` lower bound reported alongside.
pub fn check_slice(model: &SliceModel, t: usize, tol: f64) -> Result<Vec<BoundReport>> {
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    let da = DaModel::Slice(model);
    let name = |s: &str| format!("slice.t{t}.{s}");
    let q = da_quality(&da)?;
    let gamma = GammaProfile::exact(&da)?;
    let alpha = alpha_t(&da, &gamma, t)?;
    let beta = beta_t(&da, &gamma, t)?;
    let gap = spectral_summary(&slice_exact(model)?)?.gap;
    let gap_h = spectral_summary(&slice_hybrid(model)?)?.gap;
    let tf = t as f64;
    let mut reports = Vec::new();
    match tstep_hypothesis(&q, t) {
        Some(reason) => {
            reports.push(BoundReport::hypothesis_unmet(name("lower"), reason.clone(), tol));
            reports.push(BoundReport::hypothesis_unmet(name("lower_beta"), reason, tol));
        }
        None => {
            reports.push(
                BoundReport::inequality(name("lower"), (gap - alpha) / tf, gap_h, tol)
                    .with_witness(format!("alpha_t = {alpha}")),
            );
            reports.push(
                BoundReport::inequality(name("lower_beta"), (gap - beta) / tf, gap_h, tol)
                    .with_witness(format!("beta_t = {beta}")),
            );
        }
    }
    reports.push(if q.all_psd {
        BoundReport::inequality(name("upper"), gap_h, gap, tol)
    } else {
        BoundReport::hypothesis_unmet(name("upper"), "some level kernel is not psd", tol)
    });
    reports.push(BoundReport::inequality(name("alpha_beta"), alpha, beta, 1e-12));
    Ok(stamp(reports, &da.fingerprint()))
}
