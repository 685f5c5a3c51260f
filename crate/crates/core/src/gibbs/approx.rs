//! Approximating kernels `Q_{i,y}` that stand in for exact conditional draws.
//!
//! Every kernel produced here is checked for detailed balance against its
//! target conditional before use. Measurability of `y ↦ Q_{i,y}` is automatic
//! on finite spaces, so no further regularity is required of a rule.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::joint::JointDistribution;
use crate::error::{Error, Result};
use crate::spectral::{check_reversibility, ProbVec, ReversiblePair, StochasticKernel, REVERSIBILITY_TOL};

/// Proposal law for an independence Metropolis–Hastings step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndependenceProposal {
    Uniform,
    Weights { weights: Vec<f64> },
}

/// How `Q_{i,y}` is manufactured from the conditional `Π_{i,y}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproxRule {
    /// `Q(z, ·) = Π_{i,y}`.
    Exact,
    /// `εI + (1 − ε)Π_{i,y}`.
    Lazy { eps: f64 },
    /// Uniform proposal over the `2r` offsets `±1..=±r` (no wrap-around;
    /// out-of-range proposals stay put), Metropolis acceptance.
    MetropolisRw { radius: usize },
    /// Independence proposal with Metropolis–Hastings acceptance.
    MetropolisIndep { proposal: IndependenceProposal },
    /// Looked up in the spec's explicit table by `(i, y)`.
    ExplicitMatrix,
}

impl ApproxRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ApproxRule::Lazy { eps } if !(0.0..=1.0).contains(eps) => {
                Err(Error::InvalidSpec(format!("lazy eps {eps} outside [0, 1]")))
            }
            ApproxRule::MetropolisRw { radius: 0 } => Err(Error::InvalidSpec("random-walk radius must be >= 1".into())),
            ApproxRule::MetropolisIndep { proposal: IndependenceProposal::Weights { weights } } => {
                ProbVec::new(weights.clone()).map(|_| ()).map_err(|e| Error::InvalidSpec(e.to_string()))
            }
            _ => Ok(()),
        }
    }
}

/// A default rule, per-coordinate overrides, and explicit matrices keyed by
/// `(coordinate, complement configuration)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximatorSpec {
    pub default: ApproxRule,
    pub overrides: BTreeMap<usize, ApproxRule>,
    pub explicit: BTreeMap<(usize, Vec<usize>), DMatrix<f64>>,
}

impl Default for ApproximatorSpec {
    fn default() -> Self {
        ApproximatorSpec::exact()
    }
}

impl ApproximatorSpec {
    pub fn exact() -> Self {
        ApproximatorSpec::uniform(ApproxRule::Exact)
    }

    pub fn uniform(rule: ApproxRule) -> Self {
        ApproximatorSpec { default: rule, overrides: BTreeMap::new(), explicit: BTreeMap::new() }
    }

    pub fn lazy(eps: f64) -> Self {
        ApproximatorSpec::uniform(ApproxRule::Lazy { eps })
    }

    pub fn with_override(mut self, coord: usize, rule: ApproxRule) -> Self {
        self.overrides.insert(coord, rule);
        self
    }

    pub fn with_explicit(mut self, coord: usize, complement: Vec<usize>, matrix: DMatrix<f64>) -> Self {
        self.explicit.insert((coord, complement), matrix);
        self
    }

    pub fn rule_for(&self, coord: usize) -> &ApproxRule {
        self.overrides.get(&coord).unwrap_or(&self.default)
    }

    pub fn validate(&self) -> Result<()> {
        self.default.validate()?;
        self.overrides.values().try_for_each(ApproxRule::validate)
    }
}

/// Builds `Q_{i,y}` and verifies it is reversible with respect to `Π_{i,y}`.
pub fn make_approximator(
    joint: &JointDistribution,
    spec: &ApproximatorSpec,
    i: usize,
    complement: &[usize],
) -> Result<ReversiblePair> {
    let target = joint.conditional(i, complement)?;
    approximator_for(spec, i, complement, &target)
}

/// As [`make_approximator`] with the conditional already in hand.
pub(crate) fn approximator_for(
    spec: &ApproximatorSpec,
    i: usize,
    complement: &[usize],
    target: &ProbVec,
) -> Result<ReversiblePair> {
    let rule = spec.rule_for(i);
    let explicit = match rule {
        ApproxRule::ExplicitMatrix => Some(spec.explicit.get(&(i, complement.to_vec())).ok_or_else(|| {
            Error::InvalidSpec(format!("no explicit matrix for coordinate {i}, complement {complement:?}"))
        })?),
        _ => None,
    };
    rule_kernel(rule, target, explicit)
}

/// Applies a rule to an arbitrary finite target.
pub fn rule_kernel(rule: &ApproxRule, target: &ProbVec, explicit: Option<&DMatrix<f64>>) -> Result<ReversiblePair> {
    rule.validate()?;
    let d = target.len();
    let pi = target.as_slice();
    let matrix = match rule {
        ApproxRule::Exact => DMatrix::from_fn(d, d, |_, b| pi[b]),
        ApproxRule::Lazy { eps } => {
            DMatrix::from_fn(d, d, |a, b| if a == b { *eps } else { 0.0 } + (1.0 - eps) * pi[b])
        }
        ApproxRule::MetropolisRw { radius } => {
            let r = *radius;
            let step = 1.0 / (2 * r) as f64;
            metropolis(d, pi, |a, b| {
                let dist = a.abs_diff(b);
                if dist >= 1 && dist <= r {
                    step
                } else {
                    0.0
                }
            })
        }
        ApproxRule::MetropolisIndep { proposal } => {
            let q: Vec<f64> = match proposal {
                IndependenceProposal::Uniform => vec![1.0 / d as f64; d],
                IndependenceProposal::Weights { weights } => {
                    if weights.len() != d {
                        return Err(Error::InvalidSpec(format!(
                            "independence proposal has {} weights for {d} states",
                            weights.len()
                        )));
                    }
                    ProbVec::new(weights.clone())?.as_slice().to_vec()
                }
            };
            independence_mh(pi, &q)
        }
        ApproxRule::ExplicitMatrix => {
            let m = explicit.ok_or_else(|| Error::InvalidSpec("explicit rule without a matrix".into()))?;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::InvalidSpec(format!(
                    "explicit matrix is {}x{}, target has {d} states",
                    m.nrows(),
                    m.ncols()
                )));
            }
            m.clone()
        }
    };
    let kernel = StochasticKernel::with_tolerance(matrix, 1e-10)?;
    check_reversibility(kernel, target.clone(), REVERSIBILITY_TOL)
}

/// Metropolis kernel for a symmetric proposal `q(a, b)`.
fn metropolis(d: usize, pi: &[f64], q: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for a in 0..d {
        let mut moved = 0.0;
        for b in 0..d {
            if a == b {
                continue;
            }
            let accept = if pi[a] > 0.0 { (pi[b] / pi[a]).min(1.0) } else { 1.0 };
            let p = q(a, b) * accept;
            m[(a, b)] = p;
            moved += p;
        }
        m[(a, a)] = 1.0 - moved;
    }
    m
}

fn independence_mh(pi: &[f64], q: &[f64]) -> DMatrix<f64> {
    let d = pi.len();
    let mut m = DMatrix::zeros(d, d);
    for a in 0..d {
        let mut moved = 0.0;
        for b in 0..d {
            if a == b || q[b] == 0.0 {
                continue;
            }
            let accept = if pi[a] * q[b] > 0.0 { (pi[b] * q[a] / (pi[a] * q[b])).min(1.0) } else { 1.0 };
            let p = q[b] * accept;
            m[(a, b)] = p;
            moved += p;
        }
        m[(a, a)] = 1.0 - moved;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::space::ProductSpace;
    use crate::spectral::spectral_summary;

    fn joint() -> JointDistribution {
        JointDistribution::new(ProductSpace::new(vec![3, 2]).unwrap(), vec![0.1, 0.2, 0.3, 0.15, 0.05, 0.2]).unwrap()
    }

    #[test]
    fn exact_rule_is_independence_kernel() {
        let q = make_approximator(&joint(), &ApproximatorSpec::exact(), 0, &[1]).unwrap();
        assert!(spectral_summary(&q).unwrap().operator_norm < 1e-12);
    }

    #[test]
    fn lazy_rule_has_norm_eps() {
        let q = make_approximator(&joint(), &ApproximatorSpec::lazy(0.2), 0, &[0]).unwrap();
        let s = spectral_summary(&q).unwrap();
        assert!((s.operator_norm - 0.2).abs() < 1e-12);
        assert!(s.psd);
        for &l in &s.eigenvalues {
            assert!((l - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn random_walk_on_uniform_accepts_everything() {
        let u = ProbVec::uniform(2).unwrap();
        let q = rule_kernel(&ApproxRule::MetropolisRw { radius: 1 }, &u, None).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((q.kernel().get(a, b) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_walk_rejects_off_edge_and_uphill() {
        let pi = ProbVec::new(vec![0.5, 0.25, 0.25]).unwrap();
        let q = rule_kernel(&ApproxRule::MetropolisRw { radius: 1 }, &pi, None).unwrap();
        let k = q.kernel();
        // From 0: propose -1 (stay) or 1 (accept 1/2).
        assert!((k.get(0, 1) - 0.25).abs() < 1e-15);
        assert!((k.get(0, 0) - 0.75).abs() < 1e-15);
        assert_eq!(k.get(0, 2), 0.0);
        assert!((k.get(1, 0) - 0.5).abs() < 1e-15);
        assert!((k.get(1, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn independence_sampler_is_reversible() {
        let pi = ProbVec::new(vec![0.1, 0.6, 0.3]).unwrap();
        let rule = ApproxRule::MetropolisIndep {
            proposal: IndependenceProposal::Weights { weights: vec![1.0, 1.0, 2.0] },
        };
        let q = rule_kernel(&rule, &pi, None).unwrap();
        assert!(q.reversibility_defect() < 1e-15);
    }

    #[test]
    fn explicit_matrix_must_be_reversible() {
        let u = ProbVec::uniform(2).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.1, 0.9]);
        assert!(matches!(
            rule_kernel(&ApproxRule::ExplicitMatrix, &u, Some(&bad)),
            Err(Error::NotReversible { .. })
        ));
        let spec = ApproximatorSpec::uniform(ApproxRule::ExplicitMatrix);
        assert!(matches!(make_approximator(&joint(), &spec, 0, &[0]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(ApproxRule::Lazy { eps: 1.5 }.validate().is_err());
        assert!(ApproxRule::MetropolisRw { radius: 0 }.validate().is_err());
        let u = ProbVec::uniform(3).unwrap();
        assert!(rule_kernel(&ApproxRule::Lazy { eps: -0.1 }, &u, None).is_err());
    }
}
