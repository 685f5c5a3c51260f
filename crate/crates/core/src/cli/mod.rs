//! Configuration files, built-in demos and run orchestration behind the
//! `hgibbs` binary.

pub mod config;
pub mod demos;
pub mod run;

pub use config::{
    parse_config, parse_config_str, ApproximatorConfig, CoordOverride, ExplicitEntry, LevelOverride, ModelConfig,
    ModelSpec, RunConfig, Suite,
};
pub use demos::{demo_config, list_demos, DEMOS};
pub use run::{
    analyze, run_suite, simulate_config, FunctionSpec, KernelChoice, KernelSummary, RunReport, SimulationReport,
    Timing,
};
