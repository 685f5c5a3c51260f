//! TOML model configuration: parsing, validation, canonical form and
//! fingerprint.
//!
//! ```toml
//! selection = [0.5, 0.5]       # optional, uniform by default
//!
//! [model]
//! kind = "explicit"            # explicit | product | slice | random
//! sizes = [2, 2]
//! weights = [0.1, 0.2, 0.3, 0.4]
//!
//! [approximator]
//! default = { kind = "lazy", eps = 0.3 }
//!
//! [[approximator.overrides]]
//! coord = 1
//! rule = { kind = "metropolis_rw", radius = 1 }
//!
//! [run]
//! suites = ["all"]
//! t = [2, 4]
//! tol = 1e-9
//! ```
//!
//! Top-level keys (`name`, `selection`, `alt_selection`) must come before the
//! first table, as usual in TOML.

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{CheckOptions, DEFAULT_TOL, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::gibbs::random::random_joint;
use crate::gibbs::{ApproxRule, ApproximatorSpec, JointDistribution, ProductSpace, SelectionProbs, SliceModel};
use crate::spectral::StochasticKernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Random-scan selection probabilities; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<Vec<f64>>,
    /// Second selection vector for the selection suite; proportional to
    /// `1, 2, …, n` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt_selection: Option<Vec<f64>>,
    pub model: ModelSpec,
    #[serde(default)]
    pub approximator: ApproximatorConfig,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Joint weights over the product space, coordinate 0 fastest.
    Explicit { sizes: Vec<usize>, weights: Vec<f64> },
    /// Independent coordinates with the given (unnormalized) marginals.
    Product { marginals: Vec<Vec<f64>> },
    /// Finite slice sampler for the unnormalized density `weights`.
    Slice {
        weights: Vec<f64>,
        #[serde(default = "exact_rule")]
        levels: ApproxRule,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        level_overrides: Vec<LevelOverride>,
    },
    /// Seeded random joint with strictly positive weights.
    Random { sizes: Vec<usize>, seed: u64 },
}

fn exact_rule() -> ApproxRule {
    ApproxRule::Exact
}

/// Kernel for one slice level: a rule, or an explicit matrix reversible with
/// respect to the uniform law on the level set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelOverride {
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<ApproxRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximatorConfig {
    #[serde(default = "exact_rule")]
    pub default: ApproxRule,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<CoordOverride>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub explicit: Vec<ExplicitEntry>,
}

impl Default for ApproximatorConfig {
    fn default() -> Self {
        ApproximatorConfig { default: ApproxRule::Exact, overrides: Vec::new(), explicit: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordOverride {
    pub coord: usize,
    pub rule: ApproxRule,
}

/// Explicit `Q_{coord, complement}`, used by coordinates whose rule is
/// `explicit_matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitEntry {
    pub coord: usize,
    pub complement: Vec<usize>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    RandomScan,
    Da,
    Block,
    Slice,
    Selection,
    Supplement,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 6] =
        [Suite::RandomScan, Suite::Da, Suite::Block, Suite::Slice, Suite::Selection, Suite::Supplement];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default = "default_t")]
    pub t: Vec<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Seed for the random test functions.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_suites() -> Vec<Suite> {
    vec![Suite::All]
}

fn default_t() -> Vec<usize> {
    vec![2, 4]
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suites: default_suites(),
            t: default_t(),
            tol: default_tol(),
            seed: 0,
            trials: default_trials(),
        }
    }
}

impl RunConfig {
    pub fn options(&self) -> CheckOptions {
        CheckOptions { tol: self.tol, trials: self.trials, seed: self.seed }
    }

    /// The concrete suites requested, in canonical order.
    pub fn expanded_suites(&self) -> Vec<Suite> {
        if self.suites.contains(&Suite::All) {
            return Suite::CONCRETE.to_vec();
        }
        let mut s = self.suites.clone();
        s.sort();
        s.dedup();
        s
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a configuration from TOML text. Syntax errors map to
/// [`Error::Parse`]; type, unknown-key and consistency errors to
/// [`Error::Schema`].
/// TOML integers are signed 64-bit, so larger seeds could not be written back.
pub const MAX_SEED: u64 = i64::MAX as u64;

pub fn parse_config_str(text: &str) -> Result<ModelConfig> {
    if let Err(e) = text.parse::<toml::Table>() {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        return Err(Error::Parse { line, column, message: e.message().to_string() });
    }
    let config: ModelConfig = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| line_col(text, s.start));
        Error::Schema(match at {
            Some((line, column)) => format!("line {line}, column {column}: {}", e.message()),
            None => e.message().to_string(),
        })
    })?;
    config.validate()?;
    Ok(config.canonicalize())
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ModelConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

impl ModelConfig {
    pub fn new(model: ModelSpec) -> Self {
        ModelConfig {
            name: None,
            selection: None,
            alt_selection: None,
            model,
            approximator: ApproximatorConfig::default(),
            run: RunConfig::default(),
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn with_approximator(mut self, approximator: ApproximatorConfig) -> Self {
        self.approximator = approximator;
        self
    }

    /// Number of coordinates of the joint (the slice model counts as one).
    pub fn n_coords(&self) -> usize {
        match &self.model {
            ModelSpec::Explicit { sizes, .. } | ModelSpec::Random { sizes, .. } => sizes.len(),
            ModelSpec::Product { marginals } => marginals.len(),
            ModelSpec::Slice { .. } => 1,
        }
    }

    pub fn is_slice(&self) -> bool {
        matches!(self.model, ModelSpec::Slice { .. })
    }

    /// Structural checks that do not need the model to be built.
    pub fn validate(&self) -> Result<()> {
        match &self.model {
            ModelSpec::Explicit { sizes, weights } => {
                let expected = sizes.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
                match expected {
                    Some(e) if e == weights.len() => {}
                    Some(e) => {
                        return Err(schema(format!(
                            "model.weights has {} entries, expected {e} (the product of sizes {sizes:?})",
                            weights.len()
                        )))
                    }
                    None => return Err(schema("model.sizes overflow")),
                }
            }
            ModelSpec::Product { marginals } if marginals.is_empty() => {
                return Err(schema("model.marginals must list at least one coordinate"))
            }
            ModelSpec::Slice { level_overrides, .. } => {
                for o in level_overrides {
                    if o.rule.is_some() == o.matrix.is_some() {
                        return Err(schema(format!(
                            "model.level_overrides for level {} needs exactly one of `rule` or `matrix`",
                            o.level
                        )));
                    }
                }
            }
            ModelSpec::Random { seed, .. } if *seed > MAX_SEED => {
                return Err(schema(format!("model.seed must be at most {MAX_SEED}")))
            }
            _ => {}
        }
        if self.run.seed > MAX_SEED {
            return Err(schema(format!("run.seed must be at most {MAX_SEED}")));
        }
        let n = self.n_coords();
        for (key, sel) in [("selection", &self.selection), ("alt_selection", &self.alt_selection)] {
            if let Some(p) = sel {
                if self.is_slice() {
                    return Err(schema(format!("{key} does not apply to slice models")));
                }
                if p.len() != n {
                    return Err(schema(format!("{key} has {} entries, expected {n} (one per coordinate)", p.len())));
                }
                SelectionProbs::new(p.clone()).map_err(|e| schema(format!("{key}: {e}")))?;
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for o in &self.approximator.overrides {
            if o.coord >= n {
                return Err(schema(format!("approximator override for coordinate {} but the model has {n}", o.coord)));
            }
            if !seen.insert(o.coord) {
                return Err(schema(format!("duplicate approximator override for coordinate {}", o.coord)));
            }
        }
        if self.run.t.contains(&0) {
            return Err(schema("run.t values must be at least 1"));
        }
        if !(self.run.tol.is_finite() && self.run.tol >= 0.0) {
            return Err(schema("run.tol must be a nonnegative number"));
        }
        if self.run.suites.is_empty() {
            return Err(schema("run.suites must not be empty"));
        }
        Ok(())
    }

    /// Canonical form: defaults made explicit, lists sorted and deduplicated.
    pub fn canonicalize(mut self) -> Self {
        if !self.is_slice() && self.selection.is_none() {
            self.selection = Some(SelectionProbs::uniform(self.n_coords()).as_slice().to_vec());
        }
        self.approximator.overrides.sort_by_key(|o| o.coord);
        self.approximator.explicit.sort_by(|a, b| (a.coord, &a.complement).cmp(&(b.coord, &b.complement)));
        if let ModelSpec::Slice { level_overrides, .. } = &mut self.model {
            level_overrides.sort_by_key(|o| o.level);
        }
        self.run.suites = self.run.expanded_suites();
        if self.run.suites.len() == Suite::CONCRETE.len() {
            self.run.suites = vec![Suite::All];
        }
        self.run.t.sort();
        self.run.t.dedup();
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| schema(e.to_string()))
    }

    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.clone().canonicalize())?)
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }

    /// The joint distribution; an error for slice models.
    pub fn joint(&self) -> Result<JointDistribution> {
        match &self.model {
            ModelSpec::Explicit { sizes, weights } => JointDistribution::new(ProductSpace::new(sizes.clone())?, weights.clone()),
            ModelSpec::Product { marginals } => JointDistribution::product(marginals),
            ModelSpec::Random { sizes, seed } => random_joint(&mut ChaCha8Rng::seed_from_u64(*seed), sizes),
            ModelSpec::Slice { .. } => Err(schema("slice models have no product-space joint")),
        }
    }

    pub fn slice_model(&self) -> Result<SliceModel> {
        let ModelSpec::Slice { weights, levels, level_overrides } = &self.model else {
            return Err(schema("not a slice model"));
        };
        let mut model = SliceModel::new(weights.clone())?.with_all_levels(levels)?;
        for o in level_overrides {
            if o.level >= model.n_levels() {
                return Err(schema(format!(
                    "level override for level {} but the model has {} levels",
                    o.level,
                    model.n_levels()
                )));
            }
            model = match (&o.rule, &o.matrix) {
                (Some(rule), _) => model.with_level_rule(o.level, rule)?,
                (None, Some(rows)) => model.with_level_kernel(o.level, StochasticKernel::from_rows(rows)?)?,
                (None, None) => unreachable!("validated"),
            };
        }
        Ok(model)
    }

    pub fn selection_probs(&self) -> Result<SelectionProbs> {
        match &self.selection {
            Some(p) => SelectionProbs::new(p.clone()),
            None => Ok(SelectionProbs::uniform(self.n_coords())),
        }
    }

    pub fn alt_selection_probs(&self) -> Result<SelectionProbs> {
        match &self.alt_selection {
            Some(p) => SelectionProbs::new(p.clone()),
            None => {
                let n = self.n_coords();
                let total = (n * (n + 1) / 2) as f64;
                let mut p: Vec<f64> = (1..=n).map(|k| k as f64 / total).collect();
                let head: f64 = p[..n - 1].iter().sum();
                p[n - 1] = 1.0 - head;
                SelectionProbs::new(p)
            }
        }
    }

    pub fn approximator_spec(&self) -> Result<ApproximatorSpec> {
        let a = &self.approximator;
        let mut spec = ApproximatorSpec::uniform(a.default.clone());
        for o in &a.overrides {
            spec = spec.with_override(o.coord, o.rule.clone());
        }
        for e in &a.explicit {
            let d = e.matrix.len();
            if let Some(row) = e.matrix.iter().find(|r| r.len() != d) {
                return Err(schema(format!(
                    "explicit matrix for coordinate {} has a row of length {}, expected {d}",
                    e.coord,
                    row.len()
                )));
            }
            spec = spec.with_explicit(e.coord, e.complement.clone(), DMatrix::from_fn(d, d, |i, j| e.matrix[i][j]));
        }
        spec.validate()?;
        Ok(spec)
    }
}
