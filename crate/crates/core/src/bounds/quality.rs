use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gibbs::approx::approximator_for;
use crate::gibbs::scan::fiber_target;
use crate::gibbs::{ApproximatorSpec, JointDistribution};
use crate::spectral::analysis::ratio_extrema;
use crate::spectral::{spectral_summary, SpectralSummary};

/// Spectral data of one approximating kernel `Q_{i,y}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalQuality {
    pub coord: usize,
    /// Values of the conditioning coordinates (or the level, for slice models).
    pub complement: Vec<usize>,
    pub norm: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub psd: bool,
    /// The conditional has a single support point, so there is nothing to mix.
    pub trivial: bool,
}

impl ConditionalQuality {
    pub fn from_summary(coord: usize, complement: Vec<usize>, s: &SpectralSummary) -> Self {
        let (ratio_min, ratio_max) = ratio_extrema(s);
        ConditionalQuality {
            coord,
            complement,
            norm: s.operator_norm,
            ratio_min,
            ratio_max,
            psd: s.psd,
            trivial: s.is_trivial(),
        }
    }
}

/// Worst-case approximation constants over every supported conditional.
///
/// `c` bounds every `‖Q_{i,y}‖`; `[c1, c2]` contains every Dirichlet ratio
/// `E_Q(g)/‖g‖²`. Conditionals with a single support point impose no
/// constraint; when every conditional is of that kind the constants are those
/// of exact sampling (`c = 0`, `c1 = c2 = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxQuality {
    pub per_conditional: Vec<ConditionalQuality>,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub all_psd: bool,
}

impl ApproxQuality {
    pub fn aggregate(per_conditional: Vec<ConditionalQuality>) -> Self {
        let active = || per_conditional.iter().filter(|q| !q.trivial);
        let c = active().map(|q| q.norm).fold(0.0, f64::max);
        let c1 = active().map(|q| q.ratio_min).reduce(f64::min).unwrap_or(1.0);
        let c2 = active().map(|q| q.ratio_max).reduce(f64::max).unwrap_or(1.0);
        let all_psd = active().all(|q| q.psd);
        ApproxQuality { per_conditional, c, c1, c2, all_psd }
    }

    /// The conditional attaining `c`, formatted for report witnesses.
    pub fn worst_label(&self) -> Option<String> {
        self.per_conditional
            .iter()
            .filter(|q| !q.trivial)
            .reduce(|best, q| if q.norm > best.norm { q } else { best })
            .map(|q| format!("i={} y={:?}", q.coord, q.complement))
    }
}

/// Approximation constants for the kernels `Q_{i,y}` with `i` in `coords`.
pub fn approx_quality_coords(
    joint: &JointDistribution,
    spec: &ApproximatorSpec,
    coords: &[usize],
) -> Result<ApproxQuality> {
    spec.validate()?;
    let mut table = Vec::new();
    for &i in coords {
        for fiber in joint.fibers(&[i])? {
            if fiber.mass <= 0.0 {
                continue;
            }
            let target = fiber_target(joint, &fiber)?;
            let q = approximator_for(spec, i, &fiber.complement, &target)?;
            table.push(ConditionalQuality::from_summary(i, fiber.complement, &spectral_summary(&q)?));
        }
    }
    table.sort_by(|a, b| (a.coord, &a.complement).cmp(&(b.coord, &b.complement)));
    Ok(ApproxQuality::aggregate(table))
}

/// Approximation constants over every coordinate.
pub fn approx_quality(joint: &JointDistribution, spec: &ApproximatorSpec) -> Result<ApproxQuality> {
    let coords: Vec<usize> = (0..joint.n_coords()).collect();
    approx_quality_coords(joint, spec, &coords)
}
