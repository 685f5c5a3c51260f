//! Certified inequality reports.
//!
//! A [`BoundReport`] records one inequality `lhs <= rhs` together with its
//! slack `rhs - lhs` and the tolerance it was judged at. Reports serialize to
//! a flat JSON object:
//!
//! ```text
//! { name, lhs, rhs, slack, pass, status, tol, witness, fingerprint }
//! ```
//!
//! with `status` one of `"pass"`, `"fail"` or `"hypothesis_unmet"`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Outcome of a certified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The theorem's hypothesis does not hold for this model, so the bound
    /// makes no claim. Never counted as a failure.
    HypothesisUnmet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub status: Status,
    pub tol: f64,
    pub witness: Option<String>,
    pub fingerprint: String,
}

impl BoundReport {
    /// Report for the inequality `lhs <= rhs`, passing iff `rhs - lhs >= -tol`.
    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        let pass = slack >= -tol;
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            pass,
            status: if pass { Status::Pass } else { Status::Fail },
            tol,
            witness: None,
            fingerprint: String::new(),
        }
    }

    /// A report that makes no claim because the hypothesis failed.
    pub fn hypothesis_unmet(name: impl Into<String>, reason: impl Into<String>, tol: f64) -> Self {
        BoundReport {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            pass: false,
            status: Status::HypothesisUnmet,
            tol,
            witness: Some(reason.into()),
            fingerprint: String::new(),
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = fingerprint.into();
        self
    }

    /// True unless the inequality was checked and violated.
    pub fn acceptable(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Tracks the tightest instance of a family of inequalities `lhs_k <= rhs_k`.
///
/// Used when one inequality is asserted for a battery of test functions; the
/// resulting report carries the worst slack and the label of the function
/// that produced it.
#[derive(Debug)]
pub(crate) struct WorstCase {
    name: String,
    tol: f64,
    relative: bool,
    worst: Option<(f64, f64, String)>,
}

impl WorstCase {
    pub(crate) fn new(name: impl Into<String>, tol: f64) -> Self {
        WorstCase { name: name.into(), tol, relative: false, worst: None }
    }

    /// Judges each instance at `tol · (1 + max(|lhs|, |rhs|))`, for quantities
    /// such as asymptotic variances whose scale is set by `1/gap`.
    pub(crate) fn relative(name: impl Into<String>, tol: f64) -> Self {
        WorstCase { relative: true, ..WorstCase::new(name, tol) }
    }

    fn scale(&self, lhs: f64, rhs: f64) -> f64 {
        if self.relative {
            1.0 + lhs.abs().max(rhs.abs())
        } else {
            1.0
        }
    }

    pub(crate) fn observe(&mut self, lhs: f64, rhs: f64, label: impl FnOnce() -> String) {
        let slack = (rhs - lhs) / self.scale(lhs, rhs);
        let replace = match &self.worst {
            None => true,
            Some((l, r, _)) => slack < (r - l) / self.scale(*l, *r) || slack.is_nan(),
        };
        if replace {
            self.worst = Some((lhs, rhs, label()));
        }
    }

    pub(crate) fn finish(self) -> BoundReport {
        let scale = self.worst.as_ref().map_or(1.0, |(l, r, _)| self.scale(*l, *r));
        match self.worst {
            Some((lhs, rhs, label)) => {
                let tol = self.tol * scale;
                BoundReport::inequality(self.name, lhs, rhs, tol).with_witness(label)
            }
            None => BoundReport::hypothesis_unmet(self.name, "no test functions", self.tol),
        }
    }
}

/// Short stable hash of arbitrary bytes, hex encoded.
pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

/// Fingerprint of a list of floats by their exact bit patterns.
pub fn fingerprint_floats<'a>(tag: &str, values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut bytes = tag.as_bytes().to_vec();
    for v in values {
        bytes.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fingerprint_bytes(&bytes)
}
