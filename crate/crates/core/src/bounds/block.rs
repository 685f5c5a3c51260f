//! Comparison of block random-scan samplers of different block sizes.

use super::battery::test_functions;
use super::quality::{ApproxQuality, ConditionalQuality};
use super::{stamp, CheckOptions, GAP_FLOOR};
use crate::error::{Error, Result};
use crate::gibbs::scan::uniform_blocks;
use crate::gibbs::{block_random_scan, inner_block_kernel, JointDistribution};
use crate::report::{BoundReport, WorstCase};
use crate::spectral::{asymptotic_variances, dirichlet_form, spectral_decomposition, spectral_summary, FunctionVec};

fn check_sizes(n: usize, outer: usize, inner: usize) -> Result<()> {
    if inner == 0 || inner >= outer || outer >= n {
        return Err(Error::InvalidBlockSize {
            size: inner,
            coords: n,
            reason: format!("need 1 <= inner < outer <= {} (outer = {outer})", n.saturating_sub(1)),
        });
    }
    Ok(())
}

/// Quality of the inner kernels `Q_{Λ,y}` over every `outer`-subset `Λ` and
/// supported `y`. Conditionals are labelled by the first coordinate of `Λ`
/// and the complement values.
pub fn block_inner_quality(joint: &JointDistribution, outer: usize, inner: usize) -> Result<ApproxQuality> {
    check_sizes(joint.n_coords(), outer, inner)?;
    let mut table = Vec::new();
    for (block, _) in uniform_blocks(joint.n_coords(), outer) {
        for fiber in joint.fibers(&block)? {
            if fiber.mass <= 0.0 {
                continue;
            }
            let q = inner_block_kernel(joint, &block, &fiber.complement, inner)?;
            table.push(ConditionalQuality::from_summary(block[0], fiber.complement, &spectral_summary(&q)?));
        }
    }
    Ok(ApproxQuality::aggregate(table))
}

/// Gap, Dirichlet and variance chains between `T_outer` and `T_inner`,
/// reported as `block.l{outer}m{inner}.*`:
///
/// * `c1(1−‖T_ℓ‖) ≤ 1−‖T_m‖ ≤ 1−‖T_ℓ‖`;
/// * `c1·E_{T_ℓ}(f) ≤ E_{T_m}(f) ≤ E_{T_ℓ}(f)`;
/// * `var_{T_ℓ}(f) ≤ var_{T_m}(f) ≤ var_{T_ℓ}(f)/c1 + (1/c1 − 1)‖f‖²`.
pub fn check_block(joint: &JointDistribution, outer: usize, inner: usize, opts: CheckOptions) -> Result<Vec<BoundReport>> {
    check_sizes(joint.n_coords(), outer, inner)?;
    let c1 = block_inner_quality(joint, outer, inner)?.c1;
    let t_outer = block_random_scan(joint, outer)?;
    let t_inner = block_random_scan(joint, inner)?;
    let dec = spectral_decomposition(&t_outer)?;
    let dec_inner = spectral_decomposition(&t_inner)?;
    let (gap, gap_inner) = (dec.summary.gap, dec_inner.summary.gap);
    let c1_note = format!("c1 = {c1}");
    let name = |s: &str| format!("block.l{outer}m{inner}.{s}");
    let mut reports = vec![
        BoundReport::inequality(name("gap_lower"), c1 * gap, gap_inner, opts.tol).with_witness(c1_note.clone()),
        BoundReport::inequality(name("gap_upper"), gap_inner, gap, opts.tol),
    ];

    let w = t_outer.stationary();
    let mut eig = dec.eigenfunctions.clone();
    eig.extend(dec_inner.eigenfunctions.iter().cloned());
    let fs = test_functions(&eig, w, opts.trials, opts.seed);
    let mut d_lower = WorstCase::new(name("dirichlet_lower"), opts.tol);
    let mut d_upper = WorstCase::new(name("dirichlet_upper"), opts.tol);
    for tf in &fs {
        let e = dirichlet_form(&t_outer, &tf.f)?;
        let e_inner = dirichlet_form(&t_inner, &tf.f)?;
        d_lower.observe(c1 * e, e_inner, || tf.label.clone());
        d_upper.observe(e_inner, e, || tf.label.clone());
    }
    reports.push(d_lower.finish());
    reports.push(d_upper.finish());

    if gap <= GAP_FLOOR || c1 <= 0.0 {
        let reason = format!("needs a positive gap and c1 > 0 (gap = {gap}, c1 = {c1})");
        reports.push(BoundReport::hypothesis_unmet(name("variance_lower"), reason.clone(), opts.tol));
        reports.push(BoundReport::hypothesis_unmet(name("variance_upper"), reason, opts.tol));
    } else {
        let funcs: Vec<FunctionVec> = fs.iter().map(|tf| tf.f.clone()).collect();
        let var = asymptotic_variances(&t_outer, &funcs)?;
        let var_inner = asymptotic_variances(&t_inner, &funcs)?;
        let mut v_lower = WorstCase::relative(name("variance_lower"), opts.tol);
        let mut v_upper = WorstCase::relative(name("variance_upper"), opts.tol);
        for (k, tf) in fs.iter().enumerate() {
            let norm = w.norm_sq(tf.f.centered(w)?.as_slice());
            v_lower.observe(var[k], var_inner[k], || tf.label.clone());
            v_upper.observe(var_inner[k], var[k] / c1 + (1.0 / c1 - 1.0) * norm, || tf.label.clone());
        }
        reports.push(v_lower.finish());
        reports.push(v_upper.finish().with_witness(c1_note));
    }
    Ok(stamp(reports, &joint.fingerprint()))
}
