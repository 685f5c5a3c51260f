//! Approximation-quality constants and certified comparison inequalities.
//!
//! Every `check_*` function returns one [`BoundReport`] per inequality it
//! certifies. Inequalities asserted for all test functions are reported at
//! their tightest instance, with the function's label as the witness. A
//! report whose theorem hypothesis fails for the model carries
//! [`Status::HypothesisUnmet`](crate::Status::HypothesisUnmet) instead of a
//! verdict.

pub mod battery;
pub mod block;
pub mod quality;
pub mod random_scan;
pub mod two_block;

pub use battery::{test_functions, TestFunction};
pub use block::{block_inner_quality, check_block};
pub use quality::{approx_quality, approx_quality_coords, ApproxQuality, ConditionalQuality};
pub use random_scan::{
    check_gap_sandwich, check_variance_sandwich, check_selection_probs, check_power_expansion,
    check_dirichlet_sandwich, probe_selection_conjecture, ConjectureProbe,
};
pub use two_block::{
    alpha_t, beta_t, check_da_sandwich, check_da_tstep, check_da_variance_t, check_slice, da_quality, DaModel,
    GammaProfile, GammaSource,
};

use crate::report::BoundReport;

/// Default certification tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of random test functions per check.
pub const DEFAULT_TRIALS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { tol: DEFAULT_TOL, trials: DEFAULT_TRIALS, seed: 0 }
    }
}

impl CheckOptions {
    pub fn with_tol(self, tol: f64) -> Self {
        CheckOptions { tol, ..self }
    }

    pub fn with_trials(self, trials: usize) -> Self {
        CheckOptions { trials, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        CheckOptions { seed, ..self }
    }
}

pub(crate) fn stamp(reports: Vec<BoundReport>, fingerprint: &str) -> Vec<BoundReport> {
    reports.into_iter().map(|r| r.with_fingerprint(fingerprint)).collect()
}

/// Gaps below this are treated as zero when a hypothesis needs `‖K‖ < 1`.
pub(crate) const GAP_FLOOR: f64 = 1e-12;
