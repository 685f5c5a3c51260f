//! Orchestration of kernel builds, checks and simulations for one config.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, Suite};
use crate::bounds::{
    approx_quality, check_block, check_gap_sandwich, check_variance_sandwich, check_da_sandwich, check_da_tstep,
    check_da_variance_t, check_selection_probs, check_slice, check_power_expansion, check_dirichlet_sandwich,
    da_quality, ApproxQuality, DaModel,
};
use crate::error::{Error, Result};
use crate::gibbs::{
    block_random_scan, da_exact, da_hybrid, exact_random_scan, hybrid_random_scan, slice_exact, slice_hybrid,
};
use crate::report::{BoundReport, Status};
use crate::sim::{batch_means_variance, cross_validate_variance_batch, default_batch, simulate, Start, VarianceEstimate};
use crate::spectral::{asymptotic_variance, spectral_summary, FunctionVec, ReversiblePair, SpectralSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub name: String,
    pub summary: SpectralSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// SHA-256 of the canonical configuration.
    pub fingerprint: String,
    pub kernels: Vec<KernelSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<ApproxQuality>,
    /// Sorted by name.
    pub reports: Vec<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    pub versions: BTreeMap<String, String>,
}

impl RunReport {
    pub fn failures(&self) -> Vec<&BoundReport> {
        self.reports.iter().filter(|r| !r.acceptable()).collect()
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() {
            0
        } else {
            1
        }
    }

    pub fn without_timing(&self) -> RunReport {
        RunReport { timing: None, ..self.clone() }
    }

    /// Pretty JSON without the timing field; identical inputs give identical
    /// bytes.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.without_timing())?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per report: `name,lhs,rhs,slack,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,lhs,rhs,slack,status\n");
        for r in &self.reports {
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::HypothesisUnmet => "hypothesis_unmet",
            };
            out.push_str(&format!("{},{},{},{},{status}\n", r.name, r.lhs, r.rhs, r.slack));
        }
        out
    }
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string())])
}

fn summarize(kernels: &mut Vec<KernelSummary>, name: impl Into<String>, pair: Result<ReversiblePair>) -> Result<()> {
    kernels.push(KernelSummary { name: name.into(), summary: spectral_summary(&pair?)? });
    Ok(())
}

/// Spectral summaries of every kernel the model supports, plus approximation
/// quality constants.
fn kernel_table(config: &ModelConfig) -> Result<(Vec<KernelSummary>, ApproxQuality)> {
    let mut kernels = Vec::new();
    if config.is_slice() {
        let model = config.slice_model()?;
        summarize(&mut kernels, "slice_exact", slice_exact(&model))?;
        summarize(&mut kernels, "slice_hybrid", slice_hybrid(&model))?;
        let quality = da_quality(&DaModel::Slice(&model))?;
        return Ok((kernels, quality));
    }
    let joint = config.joint()?;
    let p = config.selection_probs()?;
    let spec = config.approximator_spec()?;
    summarize(&mut kernels, "exact_random_scan", exact_random_scan(&joint, &p))?;
    summarize(&mut kernels, "hybrid_random_scan", hybrid_random_scan(&joint, &p, &spec))?;
    let n = joint.n_coords();
    if n == 2 {
        summarize(&mut kernels, "da_exact", da_exact(&joint))?;
        summarize(&mut kernels, "da_hybrid", da_hybrid(&joint, &spec))?;
    }
    for size in 1..n {
        summarize(&mut kernels, format!("block_random_scan.l{size}"), block_random_scan(&joint, size))?;
    }
    Ok((kernels, approx_quality(&joint, &spec)?))
}

/// Spectral summaries and quality constants, without running any check.
pub fn analyze(config: &ModelConfig) -> Result<RunReport> {
    let start = Instant::now();
    let (kernels, quality) = kernel_table(config)?;
    Ok(RunReport {
        name: config.name.clone(),
        fingerprint: config.fingerprint()?,
        kernels,
        quality: Some(quality),
        reports: Vec::new(),
        timing: Some(Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }),
        versions: versions(),
    })
}

fn not_applicable(suite: Suite, reason: &str, tol: f64) -> BoundReport {
    let name = serde_json::to_value(suite).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    BoundReport::hypothesis_unmet(format!("{name}.applicable"), reason, tol)
}

fn run_joint_suite(config: &ModelConfig, suite: Suite, explicit: bool, out: &mut Vec<BoundReport>) -> Result<()> {
    let joint = config.joint()?;
    let p = config.selection_probs()?;
    let spec = config.approximator_spec()?;
    let opts = config.run.options();
    let tol = opts.tol;
    let n = joint.n_coords();
    let skip = |reason: &str, out: &mut Vec<BoundReport>| {
        if explicit {
            out.push(not_applicable(suite, reason, tol));
        }
    };
    match suite {
        Suite::RandomScan => {
            out.extend(check_dirichlet_sandwich(&joint, &p, &spec, opts)?);
            out.extend(check_gap_sandwich(&joint, &p, &spec, tol)?);
            out.extend(check_variance_sandwich(&joint, &p, &spec, None, opts)?);
        }
        Suite::Da if n == 2 => {
            out.extend(check_da_sandwich(&joint, &spec, tol)?);
            let model = DaModel::Joint { joint: &joint, spec: &spec };
            for &t in &config.run.t {
                out.extend(check_da_tstep(&model, t, opts)?);
                out.extend(check_da_variance_t(&model, t, opts)?);
            }
        }
        Suite::Da => skip("data augmentation needs exactly two coordinates", out),
        Suite::Block if n >= 3 => {
            for outer in 2..n {
                for inner in 1..outer {
                    out.extend(check_block(&joint, outer, inner, opts)?);
                }
            }
        }
        Suite::Block => skip("block comparisons need at least three coordinates", out),
        Suite::Slice => skip("not a slice model", out),
        Suite::Selection => out.extend(check_selection_probs(&joint, &p, &config.alt_selection_probs()?, &spec, tol)?),
        Suite::Supplement if p.is_uniform() => {
            for &t in &config.run.t {
                out.extend(check_power_expansion(&joint, &p, &spec, t, tol)?);
            }
        }
        Suite::Supplement => skip("the power-expansion bound assumes uniform selection", out),
        Suite::All => unreachable!("expanded before dispatch"),
    }
    Ok(())
}

fn run_slice_suite(config: &ModelConfig, suite: Suite, explicit: bool, out: &mut Vec<BoundReport>) -> Result<()> {
    let model = config.slice_model()?;
    let opts = config.run.options();
    match suite {
        Suite::Da => {
            let da = DaModel::Slice(&model);
            for &t in &config.run.t {
                out.extend(check_da_tstep(&da, t, opts)?);
                out.extend(check_da_variance_t(&da, t, opts)?);
            }
        }
        Suite::Slice => {
            for &t in &config.run.t {
                out.extend(check_slice(&model, t, opts.tol)?);
            }
        }
        _ if explicit => out.push(not_applicable(suite, "needs a product-space joint", opts.tol)),
        _ => {}
    }
    Ok(())
}

/// Builds the model's kernels, runs every requested suite and collects the
/// reports sorted by name.
pub fn run_suite(config: &ModelConfig) -> Result<RunReport> {
    let start = Instant::now();
    let (kernels, quality) = kernel_table(config)?;
    let explicit = !config.run.suites.contains(&Suite::All);
    let mut reports = Vec::new();
    for suite in config.run.expanded_suites() {
        if config.is_slice() {
            run_slice_suite(config, suite, explicit, &mut reports)?;
        } else {
            run_joint_suite(config, suite, explicit, &mut reports)?;
        }
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(RunReport {
        name: config.name.clone(),
        fingerprint: config.fingerprint()?,
        kernels,
        quality: Some(quality),
        reports,
        timing: Some(Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 }),
        versions: versions(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    Exact,
    Hybrid,
}

/// Observable for simulation: a coordinate's value or an explicit vector.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Coord(usize),
    Vector(Vec<f64>),
}

impl std::str::FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("expected coord:<i> or vector:<v0,v1,...>, got {s:?}"));
        if let Some(i) = s.strip_prefix("coord:") {
            return i.trim().parse().map(FunctionSpec::Coord).map_err(|_| bad());
        }
        if let Some(v) = s.strip_prefix("vector:") {
            return v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()
                .map(FunctionSpec::Vector);
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub fingerprint: String,
    pub kernel: KernelChoice,
    pub steps: usize,
    pub seed: u64,
    pub estimate: VarianceEstimate,
    pub exact: f64,
    pub cross_validation: BoundReport,
}

fn sim_kernel(config: &ModelConfig, kernel: KernelChoice) -> Result<ReversiblePair> {
    if config.is_slice() {
        let m = config.slice_model()?;
        return match kernel {
            KernelChoice::Exact => slice_exact(&m),
            KernelChoice::Hybrid => slice_hybrid(&m),
        };
    }
    let joint = config.joint()?;
    let p = config.selection_probs()?;
    match kernel {
        KernelChoice::Exact => exact_random_scan(&joint, &p),
        KernelChoice::Hybrid => hybrid_random_scan(&joint, &p, &config.approximator_spec()?),
    }
}

fn function_values(config: &ModelConfig, n_states: usize, f: &FunctionSpec) -> Result<FunctionVec> {
    match f {
        FunctionSpec::Vector(v) if v.len() == n_states => FunctionVec::new(v.clone()),
        FunctionSpec::Vector(v) => Err(Error::Schema(format!("vector has {} entries, expected {n_states}", v.len()))),
        FunctionSpec::Coord(i) if config.is_slice() && *i == 0 => {
            FunctionVec::new((0..n_states).map(|y| y as f64).collect())
        }
        FunctionSpec::Coord(i) if !config.is_slice() && *i < config.n_coords() => {
            let joint = config.joint()?;
            FunctionVec::new((0..n_states).map(|x| joint.space().coord(x, *i) as f64).collect())
        }
        FunctionSpec::Coord(i) => Err(Error::Schema(format!("coordinate {i} out of range"))),
    }
}

/// Simulates the chosen kernel from stationarity and compares the batch-means
/// variance of `f` with the exact value. Returns the report and the
/// trajectory.
pub fn simulate_config(
    config: &ModelConfig,
    kernel: KernelChoice,
    steps: usize,
    seed: u64,
    f: &FunctionSpec,
    batch: Option<usize>,
) -> Result<(SimulationReport, crate::sim::Trajectory)> {
    let rev = sim_kernel(config, kernel)?;
    let fv = function_values(config, rev.n(), f)?;
    let batch = batch.unwrap_or_else(|| default_batch(steps));
    let traj = simulate(&rev, &Start::Dist(rev.stationary().clone()), steps, seed)?;
    let estimate = batch_means_variance(&traj, &fv, batch)?;
    let exact = asymptotic_variance(&rev, &fv)?;
    let cross_validation = cross_validate_variance_batch(&rev, &fv, steps, seed, batch)?;
    let report = SimulationReport {
        fingerprint: config.fingerprint()?,
        kernel,
        steps,
        seed,
        estimate,
        exact,
        cross_validation,
    };
    Ok((report, traj))
}
