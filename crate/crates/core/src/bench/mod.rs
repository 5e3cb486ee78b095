//! Experiment harness: seeded suites, summary statistics and route plots.

mod plot;
mod stats;
mod suite;

pub use plot::{plot_route, render_route_svg};
pub use stats::summarize;
pub use suite::{
    aggregate, build_generator, read_records_csv, run_experiment, run_seed, scenario_seed, solve_once,
    write_records_csv, Algorithm, AlgorithmConfigs, CaseInfo, ExperimentSummary, GeneratorKind, GeneratorSpec,
    GroupSummary, LedmaConfig, RunRecord, SolveOutcome, SuiteConfig,
};
