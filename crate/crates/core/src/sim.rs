//! Seeded simulation of finite chains, batch-means variance estimates and
//! exact L² mixing curves.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; each transition
//! consumes one `f64` draw and picks the next state by inverse CDF over the
//! current row. Identical `(kernel, start, steps, seed)` give bit-identical
//! trajectories.
//!
//! Trajectories export to plain text:
//!
//! ```text
//! # seed 42
//! # fingerprint 3f2a...
//! 0
//! 1
//! ```

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::spectral::{
    asymptotic_variance, spectral_summary, FunctionVec, ProbVec, ReversiblePair, StochasticKernel, NULL_MASS,
};

/// Fewest nonoverlapping batches accepted by [`batch_means_variance`].
pub const MIN_BATCHES: usize = 20;
/// Slack allowed between a fitted mixing rate and the operator norm.
pub const RATE_TOL: f64 = 1e-6;
/// Distances below this fraction of the initial distance are ignored when
/// fitting a rate.
const RATE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    State(usize),
    Dist(ProbVec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Visited states, starting with the initial state.
    pub states: Vec<usize>,
    pub seed: u64,
    pub fingerprint: String,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# seed {}\n# fingerprint {}\n", self.seed, self.fingerprint);
        for s in &self.states {
            let _ = writeln!(out, "{s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { line, column: 1, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut header = |key: &str| -> Result<String> {
            let (no, line) = lines.next().ok_or_else(|| parse_err(1, format!("missing `# {key}` header")))?;
            line.strip_prefix("# ")
                .and_then(|rest| rest.strip_prefix(key))
                .map(|v| v.trim().to_string())
                .ok_or_else(|| parse_err(no, format!("expected `# {key} <value>`")))
        };
        let seed_text = header("seed")?;
        let seed = seed_text.parse().map_err(|_| parse_err(1, format!("bad seed {seed_text:?}")))?;
        let fingerprint = header("fingerprint")?;
        let states = lines
            .filter(|(_, l)| !l.is_empty())
            .map(|(no, l)| l.parse().map_err(|_| parse_err(no, format!("bad state index {l:?}"))))
            .collect::<Result<_>>()?;
        Ok(Trajectory { states, seed, fingerprint })
    }
}

fn cumulative_rows(kernel: &StochasticKernel) -> Vec<Vec<f64>> {
    kernel
        .matrix()
        .row_iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect()
        })
        .collect()
}

/// Inverse CDF: the first index whose cumulative mass exceeds `u`. Rounding
/// past the last cumulative value falls back to the last positive entry.
fn draw(cumulative: &[f64], u: f64) -> usize {
    let j = cumulative.partition_point(|&c| c <= u);
    if j < cumulative.len() {
        return j;
    }
    let mut k = cumulative.len() - 1;
    while k > 0 && cumulative[k] == cumulative[k - 1] {
        k -= 1;
    }
    k
}

/// Runs `steps` states (the start included) of the chain.
pub fn simulate(rev: &ReversiblePair, start: &Start, steps: usize, seed: u64) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::PreconditionUnmet("steps must be at least 1".into()));
    }
    let n = rev.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = match start {
        Start::State(s) if *s < n => *s,
        Start::State(s) => return Err(Error::InvalidStart(format!("state {s} outside 0..{n}"))),
        Start::Dist(mu) if mu.len() == n => {
            let cum: Vec<f64> = mu
                .as_slice()
                .iter()
                .scan(0.0, |acc, &p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect();
            draw(&cum, rng.random::<f64>())
        }
        Start::Dist(mu) => {
            return Err(Error::InvalidStart(format!("start law has {} states, kernel has {n}", mu.len())))
        }
    };
    let rows = cumulative_rows(rev.kernel());
    let mut states = Vec::with_capacity(steps);
    let mut x = first;
    states.push(x);
    for _ in 1..steps {
        x = draw(&rows[x], rng.random::<f64>());
        states.push(x);
    }
    Ok(Trajectory { states, seed, fingerprint: rev.kernel().fingerprint() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub estimate: f64,
    pub se: f64,
    pub batch: usize,
    pub batches: usize,
}

/// Nonoverlapping batch means of `f` along the trajectory, centered at the
/// sample mean. The estimate is `batch` times the sample variance of the
/// batch means; its standard error is `estimate·sqrt(2/(batches−1))`.
pub fn batch_means_variance(traj: &Trajectory, f: &FunctionVec, batch: usize) -> Result<VarianceEstimate> {
    let steps = traj.len();
    let batches = steps.checked_div(batch).unwrap_or(0);
    if batches < MIN_BATCHES {
        return Err(Error::TooFewBatches { steps, batch, batches });
    }
    if let Some(&bad) = traj.states.iter().find(|&&s| s >= f.len()) {
        return Err(Error::DimensionMismatch { expected: f.len(), found: bad + 1 });
    }
    let values: Vec<f64> = traj.states[..batches * batch].iter().map(|&s| f.as_slice()[s]).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let means: Vec<f64> =
        values.chunks(batch).map(|c| c.iter().map(|v| v - mean).sum::<f64>() / batch as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let sample_var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    let estimate = batch as f64 * sample_var;
    let se = estimate * (2.0 / (batches - 1) as f64).sqrt();
    Ok(VarianceEstimate { estimate, se, batch, batches })
}

/// Default batch size for `steps` states: `floor(sqrt(steps))`.
pub fn default_batch(steps: usize) -> usize {
    (steps as f64).sqrt().floor().max(1.0) as usize
}

/// Compares a batch-means estimate from a stationary start with the exact
/// asymptotic variance; passes iff `|estimate − exact| ≤ 3·SE`.
pub fn cross_validate_variance(rev: &ReversiblePair, f: &FunctionVec, steps: usize, seed: u64) -> Result<BoundReport> {
    cross_validate_variance_batch(rev, f, steps, seed, default_batch(steps))
}

pub fn cross_validate_variance_batch(
    rev: &ReversiblePair,
    f: &FunctionVec,
    steps: usize,
    seed: u64,
    batch: usize,
) -> Result<BoundReport> {
    let exact = asymptotic_variance(rev, f)?;
    let traj = simulate(rev, &Start::Dist(rev.stationary().clone()), steps, seed)?;
    let est = batch_means_variance(&traj, f, batch)?;
    Ok(BoundReport::inequality("variance_cross_validation", (est.estimate - exact).abs(), 3.0 * est.se, 0.0)
        .with_witness(format!(
            "estimate = {}, exact = {exact}, se = {}, batch = {}, batches = {}",
            est.estimate, est.se, est.batch, est.batches
        ))
        .with_fingerprint(traj.fingerprint))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCurve {
    /// `‖μ₀Kᵗ − ω‖_ω` for `t = 0..=tmax`.
    pub distances: Vec<f64>,
    /// Decay rate fitted over the second half of the resolvable tail;
    /// `None` when fewer than three distances are resolvable.
    pub fitted_rate: Option<f64>,
    pub operator_norm: f64,
    /// `fitted_rate ≤ ‖K‖ + 1e-6`.
    pub rate_report: BoundReport,
}

/// `‖dμ/dω − 1‖_ω` over the stationary support.
fn chi_distance(mu: &[f64], omega: &ProbVec) -> f64 {
    mu.iter()
        .zip(omega.as_slice())
        .filter(|(_, &w)| w >= NULL_MASS)
        .map(|(m, w)| (m - w).powi(2) / w)
        .sum::<f64>()
        .sqrt()
}

/// Exact L² distances of `μ₀Kᵗ` from stationarity and a fitted decay rate.
pub fn mixing_curve(rev: &ReversiblePair, mu0: &ProbVec, tmax: usize) -> Result<MixingCurve> {
    let omega = rev.stationary();
    if mu0.len() != rev.n() {
        return Err(Error::DimensionMismatch { expected: rev.n(), found: mu0.len() });
    }
    if let Some(state) = (0..rev.n()).find(|&x| omega.get(x) < NULL_MASS && mu0.get(x) > 0.0) {
        return Err(Error::NotAbsolutelyContinuous { state, mass: mu0.get(state) });
    }
    let mut mu = mu0.as_slice().to_vec();
    let mut distances = Vec::with_capacity(tmax + 1);
    distances.push(chi_distance(&mu, omega));
    for _ in 0..tmax {
        mu = rev.kernel().push_forward(&mu);
        distances.push(chi_distance(&mu, omega));
    }
    let operator_norm = spectral_summary(rev)?.operator_norm;
    let floor = RATE_FLOOR * distances[0];
    let last = distances.iter().rposition(|&d| d > floor && d > 0.0);
    let fitted_rate = match last {
        Some(end) if end >= 2 => {
            let mid = end / 2;
            Some((distances[end] / distances[mid]).powf(1.0 / (end - mid) as f64))
        }
        _ => None,
    };
    let rate_report = match fitted_rate {
        Some(rate) => BoundReport::inequality("mixing.rate", rate, operator_norm, RATE_TOL),
        None => BoundReport::hypothesis_unmet("mixing.rate", "distance vanishes too quickly to fit a rate", RATE_TOL),
    }
    .with_fingerprint(rev.kernel().fingerprint());
    Ok(MixingCurve { distances, fitted_rate, operator_norm, rate_report })
}
