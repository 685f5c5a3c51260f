use serde::{Deserialize, Serialize};

use super::battery::{test_functions, TestFunction};
use super::quality::approx_quality;
use super::{stamp, CheckOptions, GAP_FLOOR};
use crate::error::{Error, Result};
use crate::gibbs::{exact_random_scan, hybrid_random_scan, ApproximatorSpec, JointDistribution, SelectionProbs};
use crate::report::{BoundReport, WorstCase};
use crate::spectral::{asymptotic_variances, dirichlet_form, spectral_decomposition, spectral_summary, FunctionVec};

/// `c1·E_T(f) ≤ E_T̂(f) ≤ c2·E_T(f)` over the eigenfunctions of `T` and
/// `opts.trials` random mean-zero functions.
pub fn check_dirichlet_sandwich(
    joint: &JointDistribution,
    p: &SelectionProbs,
    spec: &ApproximatorSpec,
    opts: CheckOptions,
) -> Result<Vec<BoundReport>> {
    let q = approx_quality(joint, spec)?;
    let t = exact_random_scan(joint, p)?;
    let th = hybrid_random_scan(joint, p, spec)?;
    let dec = spectral_decomposition(&t)?;
    let fs = test_functions(&dec.eigenfunctions, joint.weights(), opts.trials, opts.seed);
    let mut lower = WorstCase::new("dirichlet_sandwich.lower", opts.tol);
    let mut upper = WorstCase::new("dirichlet_sandwich.upper", opts.tol);
    for tf in &fs {
        let e = dirichlet_form(&t, &tf.f)?;
        let eh = dirichlet_form(&th, &tf.f)?;
        lower.observe(q.c1 * e, eh, || tf.label.clone());
        upper.observe(eh, q.c2 * e, || tf.label.clone());
    }
    Ok(stamp(vec![lower.finish(), upper.finish()], &joint.fingerprint()))
}

/// `(1−C)(1−‖T‖) ≤ 1−‖T̂‖ ≤ (1+C)(1−‖T‖)`, and `1−‖T̂‖ ≤ 1−‖T‖` when every
/// `Q_{i,y}` is positive semi-definite.
pub fn check_gap_sandwich(
    joint: &JointDistribution,
    p: &SelectionProbs,
    spec: &ApproximatorSpec,
    tol: f64,
) -> Result<Vec<BoundReport>> {
    let q = approx_quality(joint, spec)?;
    let gap = spectral_summary(&exact_random_scan(joint, p)?)?.gap;
    let gap_h = spectral_summary(&hybrid_random_scan(joint, p, spec)?)?.gap;
    let witness = q.worst_label().unwrap_or_else(|| "exact".into());
    let mut reports = vec![
        BoundReport::inequality("gap_sandwich.lower", (1.0 - q.c) * gap, gap_h, tol).with_witness(witness.clone()),
        BoundReport::inequality("gap_sandwich.upper", gap_h, (1.0 + q.c) * gap, tol).with_witness(witness),
    ];
    reports.push(if q.all_psd {
        BoundReport::inequality("gap_sandwich.psd_upper", gap_h, gap, tol)
    } else {
        BoundReport::hypothesis_unmet("gap_sandwich.psd_upper", "some approximating kernel is not psd", tol)
    });
    Ok(stamp(reports, &joint.fingerprint()))
}

/// Variance sandwich
/// `c2⁻¹var_T(f) + (c2⁻¹−1)‖f‖² ≤ var_T̂(f) ≤ c1⁻¹var_T(f) + (c1⁻¹−1)‖f‖²`.
///
/// With `f = None` the battery of eigenfunctions and random functions is used.
/// Each instance is judged at `tol·(1 + max(|lhs|, |rhs|))` since variances
/// scale like the inverse gap.
pub fn check_variance_sandwich(
    joint: &JointDistribution,
    p: &SelectionProbs,
    spec: &ApproximatorSpec,
    f: Option<&FunctionVec>,
    opts: CheckOptions,
) -> Result<Vec<BoundReport>> {
    let names = ["variance_sandwich.lower", "variance_sandwich.upper"];
    let unmet = |reason: String| -> Result<Vec<BoundReport>> {
        Ok(stamp(
            names.iter().map(|n| BoundReport::hypothesis_unmet(*n, reason.clone(), opts.tol)).collect(),
            &joint.fingerprint(),
        ))
    };
    let q = approx_quality(joint, spec)?;
    if !(q.c1 > 0.0 && q.c2 < 2.0) {
        return unmet(format!("constants c1 = {}, c2 = {} not inside (0, 2)", q.c1, q.c2));
    }
    let t = exact_random_scan(joint, p)?;
    let th = hybrid_random_scan(joint, p, spec)?;
    let dec = spectral_decomposition(&t)?;
    if dec.summary.gap <= GAP_FLOOR {
        return unmet(format!("exact kernel has no spectral gap (norm {})", dec.summary.operator_norm));
    }
    if spectral_summary(&th)?.gap <= GAP_FLOOR {
        return unmet("hybrid kernel has no spectral gap".into());
    }
    let fs = match f {
        Some(f) => vec![TestFunction { label: "given".into(), f: f.clone() }],
        None => test_functions(&dec.eigenfunctions, joint.weights(), opts.trials, opts.seed),
    };
    let funcs: Vec<FunctionVec> = fs.iter().map(|tf| tf.f.clone()).collect();
    let var = asymptotic_variances(&t, &funcs)?;
    let var_h = asymptotic_variances(&th, &funcs)?;
    let w = joint.weights();
    let mut lower = WorstCase::relative(names[0], opts.tol);
    let mut upper = WorstCase::relative(names[1], opts.tol);
    for (k, tf) in fs.iter().enumerate() {
        let f0 = tf.f.centered(w)?;
        let norm = w.norm_sq(f0.as_slice());
        lower.observe(var[k] / q.c2 + (1.0 / q.c2 - 1.0) * norm, var_h[k], || tf.label.clone());
        upper.observe(var_h[k], var[k] / q.c1 + (1.0 / q.c1 - 1.0) * norm, || tf.label.clone());
    }
    Ok(stamp(vec![lower.finish(), upper.finish()], &joint.fingerprint()))
}

fn check_positive(p: &SelectionProbs) -> Result<()> {
    match p.as_slice().iter().position(|&v| v <= 0.0) {
        Some(index) => Err(Error::ZeroSelectionProb { index }),
        None => Ok(()),
    }
}

fn min_ratio(p: &SelectionProbs, p2: &SelectionProbs) -> f64 {
    p.as_slice().iter().zip(p2.as_slice()).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min)
}

/// Comparison across selection probabilities `p` and `p′`.
///
/// With `b = (1−‖T(p)‖)/(1−‖T(p′)‖)` certifies
/// `1−‖T̂(p)‖ ≥ b(1−C)/(1+C)·(1−‖T̂(p′)‖)` (and `b(1−C)` when every
/// approximating kernel is psd), plus the minimum-ratio relations
/// `1−‖K(p)‖ ≥ min_i(p_i/p′_i)·(1−‖K(p′)‖)` for `K = T` and `K = T̂`.
pub fn check_selection_probs(
    joint: &JointDistribution,
    p: &SelectionProbs,
    p2: &SelectionProbs,
    spec: &ApproximatorSpec,
    tol: f64,
) -> Result<Vec<BoundReport>> {
    check_positive(p)?;
    check_positive(p2)?;
    let q = approx_quality(joint, spec)?;
    let gap = |sel: &SelectionProbs, hybrid: bool| -> Result<f64> {
        let k = if hybrid { hybrid_random_scan(joint, sel, spec)? } else { exact_random_scan(joint, sel)? };
        Ok(spectral_summary(&k)?.gap)
    };
    let (g, g2, gh, gh2) = (gap(p, false)?, gap(p2, false)?, gap(p, true)?, gap(p2, true)?);
    let r = min_ratio(p, p2);
    let mut reports = Vec::new();
    if g > GAP_FLOOR && g2 > GAP_FLOOR {
        let b = g / g2;
        reports.push(
            BoundReport::inequality("selection.hybrid_bound", b * (1.0 - q.c) / (1.0 + q.c) * gh2, gh, tol)
                .with_witness(format!("b = {b}")),
        );
        reports.push(if q.all_psd {
            BoundReport::inequality("selection.hybrid_bound_psd", b * (1.0 - q.c) * gh2, gh, tol)
                .with_witness(format!("b = {b}"))
        } else {
            BoundReport::hypothesis_unmet("selection.hybrid_bound_psd", "some approximating kernel is not psd", tol)
        });
    } else {
        let reason = "an exact gap is zero, so no positive b relates them";
        reports.push(BoundReport::hypothesis_unmet("selection.hybrid_bound", reason, tol));
        reports.push(BoundReport::hypothesis_unmet("selection.hybrid_bound_psd", reason, tol));
    }
    reports.push(BoundReport::inequality("selection.min_ratio_exact", r * g2, g, tol));
    reports.push(BoundReport::inequality("selection.min_ratio_hybrid", r * gh2, gh, tol));
    Ok(stamp(reports, &joint.fingerprint()))
}

/// Outcome of probing the open question whether `1−‖T(p)‖ ≥ 1−‖T(p′)‖`
/// implies `1−‖T̂(p)‖ ≥ 1−‖T̂(p′)‖`. Exploratory: a counterexample found
/// here is a numerical observation, not a certified result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureProbe {
    pub exact_gap_p: f64,
    pub exact_gap_p2: f64,
    pub hybrid_gap_p: f64,
    pub hybrid_gap_p2: f64,
    pub premise_holds: bool,
    pub conclusion_holds: bool,
}

impl ConjectureProbe {
    pub fn counterexample(&self) -> bool {
        self.premise_holds && !self.conclusion_holds
    }
}

pub fn probe_selection_conjecture(
    joint: &JointDistribution,
    p: &SelectionProbs,
    p2: &SelectionProbs,
    spec: &ApproximatorSpec,
    tol: f64,
) -> Result<ConjectureProbe> {
    let gap = |k| -> Result<f64> { Ok(spectral_summary(&k)?.gap) };
    let exact_gap_p = gap(exact_random_scan(joint, p)?)?;
    let exact_gap_p2 = gap(exact_random_scan(joint, p2)?)?;
    let hybrid_gap_p = gap(hybrid_random_scan(joint, p, spec)?)?;
    let hybrid_gap_p2 = gap(hybrid_random_scan(joint, p2, spec)?)?;
    Ok(ConjectureProbe {
        exact_gap_p,
        exact_gap_p2,
        hybrid_gap_p,
        hybrid_gap_p2,
        premise_holds: exact_gap_p >= exact_gap_p2 - tol,
        conclusion_holds: hybrid_gap_p >= hybrid_gap_p2 - tol,
    })
}

/// The power-expansion bound for uniform selection, `B = n^{−(t−1)}(1−‖T‖−Cᵗ)`:
///
/// * `power_form`: `1−‖T̂‖ᵗ ≥ B`, valid for every `n`;
/// * `bound`: `1−‖T̂‖ ≥ B`, reported only for `n ≥ 2` (a single lazy
///   coordinate violates it);
/// * `sandwich_dominates`: `(1−C)(1−‖T‖) ≥ B`, also for `n ≥ 2`.
pub fn check_power_expansion(
    joint: &JointDistribution,
    p: &SelectionProbs,
    spec: &ApproximatorSpec,
    t: usize,
    tol: f64,
) -> Result<Vec<BoundReport>> {
    if !p.is_uniform() {
        return Err(Error::NonUniformSelection);
    }
    if t == 0 {
        return Err(Error::PreconditionUnmet("t must be at least 1".into()));
    }
    let n = joint.n_coords();
    let q = approx_quality(joint, spec)?;
    let gap = spectral_summary(&exact_random_scan(joint, p)?)?.gap;
    let norm_h = spectral_summary(&hybrid_random_scan(joint, p, spec)?)?.operator_norm;
    let gap_h = 1.0 - norm_h;
    let bound = (n as f64).powi(1 - t as i32) * (gap - q.c.powi(t as i32));
    let sandwich = (1.0 - q.c) * gap;
    let name = format!("power_expansion.t{t}");
    let mut reports = vec![BoundReport::inequality(
        format!("{name}.power_form"),
        bound,
        1.0 - norm_h.powi(t as i32),
        tol,
    )];
    if n >= 2 {
        reports.push(BoundReport::inequality(format!("{name}.bound"), bound, gap_h, tol));
        reports.push(BoundReport::inequality(format!("{name}.sandwich_dominates"), bound, sandwich, tol));
    } else {
        let reason = "with a single coordinate only the t-th power form holds";
        reports.push(BoundReport::hypothesis_unmet(format!("{name}.bound"), reason, tol));
        reports.push(BoundReport::hypothesis_unmet(format!("{name}.sandwich_dominates"), reason, tol));
    }
    Ok(stamp(reports, &joint.fingerprint()))
}
