//! Built-in demonstration models.

use super::config::{ApproximatorConfig, CoordOverride, ModelConfig, ModelSpec, Suite};
use crate::error::{Error, Result};
use crate::gibbs::{ApproxRule, ProductSpace};

pub const DEMOS: [&str; 5] = ["two-coin", "three-coin-block", "two-point-slice", "spike-slab-toy", "random"];

pub fn list_demos() -> Vec<&'static str> {
    DEMOS.to_vec()
}

pub fn demo_config(name: &str) -> Result<ModelConfig> {
    let config = match name {
        "two-coin" => ModelConfig::new(ModelSpec::Product { marginals: vec![vec![1.0, 1.0]; 2] })
            .with_approximator(uniform(ApproxRule::Lazy { eps: 0.5 })),
        "three-coin-block" => {
            let mut c = ModelConfig::new(ModelSpec::Product { marginals: vec![vec![1.0, 1.0]; 3] });
            c.run.suites = vec![Suite::RandomScan, Suite::Block, Suite::Supplement];
            c
        }
        "two-point-slice" => ModelConfig::new(ModelSpec::Slice {
            weights: vec![2.0, 1.0],
            levels: ApproxRule::Lazy { eps: 0.5 },
            level_overrides: Vec::new(),
        }),
        "spike-slab-toy" => spike_slab_toy()?,
        "random" => ModelConfig::new(ModelSpec::Random { sizes: vec![3, 2, 2], seed: 7 }).with_approximator(
            ApproximatorConfig {
                default: ApproxRule::Lazy { eps: 0.25 },
                overrides: vec![CoordOverride { coord: 0, rule: ApproxRule::MetropolisRw { radius: 1 } }],
                explicit: Vec::new(),
            },
        ),
        other => return Err(Error::UnknownDemo(other.to_string())),
    };
    Ok(config.named(name).canonicalize())
}

fn uniform(rule: ApproxRule) -> ApproximatorConfig {
    ApproximatorConfig { default: rule, overrides: Vec::new(), explicit: Vec::new() }
}

/// Discretized spike-and-slab regression with two coefficients.
///
/// Coordinates: `β₀, β₁ ∈ {−2,…,2}`, inclusion indicators `z₀, z₁ ∈ {0,1}`
/// and inclusion probability `q ∈ {¼, ½, ¾}`. The coefficients are updated by
/// a radius-1 random-walk Metropolis step, everything else exactly.
fn spike_slab_toy() -> Result<ModelConfig> {
    const BETA: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
    const Q: [f64; 3] = [0.25, 0.5, 0.75];
    const SD: [f64; 2] = [0.5, 2.0];
    const DESIGN: [[f64; 2]; 2] = [[1.0, 0.5], [0.5, 1.0]];
    const RESPONSE: [f64; 2] = [1.0, 0.5];
    let sizes = vec![5, 5, 2, 2, 3];
    let space = ProductSpace::new(sizes.clone())?;
    let weights = (0..space.total())
        .map(|x| {
            let c = space.decode(x);
            let beta = [BETA[c[0]], BETA[c[1]]];
            let q = Q[c[4]];
            let mut log_w = 0.0;
            for j in 0..2 {
                let z = c[2 + j];
                let sd = SD[z];
                log_w += if z == 1 { q.ln() } else { (1.0 - q).ln() };
                log_w += -0.5 * (beta[j] / sd).powi(2) - sd.ln();
            }
            for (row, y) in DESIGN.iter().zip(RESPONSE) {
                let fit = row[0] * beta[0] + row[1] * beta[1];
                log_w -= 0.5 * (y - fit).powi(2);
            }
            log_w.exp()
        })
        .collect();
    let rw = ApproxRule::MetropolisRw { radius: 1 };
    Ok(ModelConfig::new(ModelSpec::Explicit { sizes, weights }).with_approximator(ApproximatorConfig {
        default: ApproxRule::Exact,
        overrides: vec![CoordOverride { coord: 0, rule: rw.clone() }, CoordOverride { coord: 1, rule: rw }],
        explicit: Vec::new(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_validates() {
        assert!(list_demos().len() >= 5);
        for name in list_demos() {
            let c = demo_config(name).unwrap();
            c.validate().unwrap();
            let text = c.to_toml().unwrap();
            assert_eq!(super::super::config::parse_config_str(&text).unwrap(), c, "{name}");
        }
        assert!(matches!(demo_config("nope"), Err(Error::UnknownDemo(_))));
    }

    #[test]
    fn spike_slab_has_300_states() {
        let c = demo_config("spike-slab-toy").unwrap();
        assert_eq!(c.joint().unwrap().total(), 300);
    }
}
