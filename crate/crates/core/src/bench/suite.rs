//! Seeded comparison suites over random scenarios.
//!
//! For every node count the harness generates `cases_per_count` scenarios
//! (scenario seed = `base_seed + case`) and solves each with every algorithm
//! `runs_per_case` times. Each run draws its own seed from the run key, so
//! adding or removing an algorithm leaves the other streams untouched.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plot::plot_route;
use super::stats::summarize;
use crate::engine::{run_laura, run_ledma, AttemptOutcome, Generator, LauraConfig, SolverReport};
use crate::error::{Error, Result};
use crate::evo::Individual;
use crate::llm::mock::{FaultyGenerator, OxGenerator, PerfectGenerator};
use crate::llm::{ChatBackend, ChatClient, ChatError, ChatExchange, ChatMessage, LlmEndpointConfig, LlmGenerator};
use crate::model::{route_objective, Route};
use crate::scenario::{generate_scenario, Scenario, ScenarioDefaults};
use crate::solvers::{solve_exact_with, solve_genetic, solve_greedy, solve_random, ExactConfig, GeneticConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Laura,
    Ledma,
    Genetic,
    Greedy,
    Random,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Laura,
        Algorithm::Ledma,
        Algorithm::Genetic,
        Algorithm::Greedy,
        Algorithm::Random,
        Algorithm::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Laura => "laura",
            Algorithm::Ledma => "ledma",
            Algorithm::Genetic => "genetic",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Exact => "exact",
        }
    }

    pub fn uses_generator(self) -> bool {
        matches!(self, Algorithm::Laura | Algorithm::Ledma)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    MockPerfect,
    MockOx,
    Llm,
}

/// Which generator backs the LLM-driven algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Probability that a mock corrupts a proposal; ignored for `llm`.
    pub fault_rate: f64,
    pub endpoint: LlmEndpointConfig,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            kind: GeneratorKind::MockOx,
            fault_rate: 0.0,
            endpoint: LlmEndpointConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LedmaConfig {
    pub samples: usize,
}

impl Default for LedmaConfig {
    fn default() -> Self {
        LedmaConfig { samples: 1 }
    }
}

/// Per-algorithm settings, shared by suites and single solves.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgorithmConfigs {
    pub laura: LauraConfig,
    pub ledma: LedmaConfig,
    pub genetic: GeneticConfig,
    pub exact: ExactConfig,
    pub generator: GeneratorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub node_counts: Vec<usize>,
    pub cases_per_count: usize,
    pub runs_per_case: usize,
    pub algorithms: Vec<Algorithm>,
    pub base_seed: u64,
    /// Concurrent cells; 0 uses all cores.
    pub workers: usize,
    /// Cap on simultaneous chat requests across all cells.
    pub max_concurrent_requests: usize,
    pub scenario: ScenarioDefaults,
    #[serde(flatten)]
    pub configs: AlgorithmConfigs,
    pub output_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            node_counts: vec![20, 30, 40],
            cases_per_count: 10,
            runs_per_case: 5,
            algorithms: vec![
                Algorithm::Laura,
                Algorithm::Ledma,
                Algorithm::Genetic,
                Algorithm::Greedy,
                Algorithm::Random,
            ],
            base_seed: 0,
            workers: 0,
            max_concurrent_requests: 4,
            scenario: ScenarioDefaults::default(),
            configs: AlgorithmConfigs::default(),
            output_dir: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_counts.is_empty() || self.node_counts.contains(&0) {
            return Err(Error::param("node_counts must be non-empty and positive"));
        }
        if self.cases_per_count == 0 || self.runs_per_case == 0 {
            return Err(Error::param("cases_per_count and runs_per_case must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::param("no algorithms scheduled"));
        }
        if self.algorithms.contains(&Algorithm::Exact) {
            let cap = self.configs.exact.cap();
            if let Some(&n) = self.node_counts.iter().find(|&&n| n > cap) {
                return Err(Error::param(format!(
                    "exact is scheduled for N = {n} but supports at most {cap} sensor nodes"
                )));
            }
        }
        if self.algorithms.contains(&Algorithm::Laura) {
            self.configs.laura.validate()?;
        }
        if self.algorithms.contains(&Algorithm::Ledma) && self.configs.ledma.samples == 0 {
            return Err(Error::param("ledma.samples must be at least 1"));
        }
        if self.algorithms.contains(&Algorithm::Genetic) {
            self.configs.genetic.validate()?;
        }
        if !(0.0..=1.0).contains(&self.configs.generator.fault_rate) {
            return Err(Error::param("generator.fault_rate must be within [0, 1]"));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed for one run, mixed from every component of the run key.
pub fn run_seed(base_seed: u64, n: usize, case: usize, run: usize, algorithm: Algorithm) -> u64 {
    // FNV-1a over the name keeps the seed independent of enum ordering
    let name_hash = algorithm
        .name()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    [n as u64, case as u64, run as u64, name_hash]
        .into_iter()
        .fold(splitmix64(base_seed), |acc, part| splitmix64(acc ^ part))
}

pub fn scenario_seed(base_seed: u64, case: usize) -> u64 {
    base_seed.wrapping_add(case as u64)
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub case: usize,
    pub run: usize,
    pub seed: u64,
    pub best_omega: Option<f64>,
    pub travel_objective: Option<f64>,
    pub epsilon: Option<f64>,
    pub wall_time_s: f64,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub algorithm: Algorithm,
    pub n: usize,
    pub runs: usize,
    pub failed_runs: usize,
    pub mean_omega: Option<f64>,
    pub variance_omega: Option<f64>,
    pub mean_epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseInfo {
    pub n: usize,
    pub case: usize,
    pub scenario_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub base_seed: u64,
    pub groups: Vec<GroupSummary>,
    pub cases: Vec<CaseInfo>,
    pub records: Vec<RunRecord>,
}

impl ExperimentSummary {
    pub fn group(&self, algorithm: Algorithm, n: usize) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.algorithm == algorithm && g.n == n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Mean and variance of best omega per (algorithm, n), over successful runs.
pub fn aggregate(records: &[RunRecord]) -> Vec<GroupSummary> {
    let mut keys: Vec<(usize, Algorithm)> = records.iter().map(|r| (r.n, r.algorithm)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(n, algorithm)| {
            let group: Vec<&RunRecord> = records.iter().filter(|r| r.n == n && r.algorithm == algorithm).collect();
            let omegas: Vec<f64> = group.iter().filter(|r| !r.failed).filter_map(|r| r.best_omega).collect();
            let eps: Vec<f64> = group.iter().filter(|r| !r.failed).filter_map(|r| r.epsilon).collect();
            let stats = summarize(&omegas).ok();
            GroupSummary {
                algorithm,
                n,
                runs: group.len(),
                failed_runs: group.iter().filter(|r| r.failed).count(),
                mean_omega: stats.map(|s| s.0),
                variance_omega: stats.map(|s| s.1),
                mean_epsilon: summarize(&eps).ok().map(|s| s.0),
            }
        })
        .collect()
}

/// Counting semaphore limiting concurrent chat requests.
#[derive(Debug)]
struct RequestGate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl RequestGate {
    fn new(slots: usize) -> Self {
        RequestGate {
            free: Mutex::new(slots.max(1)),
            cv: Condvar::new(),
        }
    }

    fn with<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
            while *free == 0 {
                free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
            }
            *free -= 1;
        }
        let out = f();
        *self.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.cv.notify_one();
        out
    }
}

struct GatedClient {
    client: ChatClient,
    gate: Arc<RequestGate>,
}

impl ChatBackend for GatedClient {
    fn complete(&self, messages: &[ChatMessage]) -> std::result::Result<ChatExchange, ChatError> {
        self.gate.with(|| self.client.complete(messages))
    }
}

fn gated_generator(spec: &GeneratorSpec, gate: &Arc<RequestGate>) -> Result<Box<dyn Generator>> {
    let client = ChatClient::new(spec.endpoint.clone())?;
    Ok(Box::new(LlmGenerator::new(GatedClient {
        client,
        gate: Arc::clone(gate),
    })))
}

/// Builds the generator named by `spec` with streams derived from `seed`.
pub fn build_generator(spec: &GeneratorSpec, scenario: &Scenario, seed: u64) -> Result<Box<dyn Generator>> {
    let gate = Arc::new(RequestGate::new(1));
    make_generator(spec, scenario, seed, &gate)
}

fn make_generator(spec: &GeneratorSpec, scenario: &Scenario, seed: u64, gate: &Arc<RequestGate>) -> Result<Box<dyn Generator>> {
    let fault_seed = splitmix64(seed ^ 0xfa17);
    let inner: Box<dyn Generator> = match spec.kind {
        GeneratorKind::MockPerfect => Box::new(PerfectGenerator::new(scenario)?),
        GeneratorKind::MockOx => Box::new(OxGenerator::new(splitmix64(seed ^ 0x0c))),
        GeneratorKind::Llm => return gated_generator(spec, gate),
    };
    Ok(if spec.fault_rate > 0.0 {
        Box::new(FaultyGenerator::new(inner, spec.fault_rate, fault_seed))
    } else {
        inner
    })
}

/// Result of one solve, before it is flattened into a record.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub best: Option<Individual>,
    pub epsilon: Option<f64>,
    pub report: Option<SolverReport>,
    pub failed: bool,
}

fn unreachable(report: &SolverReport) -> bool {
    let mut all = report.all_attempts().peekable();
    all.peek().is_some() && all.all(|a| a.outcome == AttemptOutcome::TransportFailed)
}

fn from_report(report: SolverReport) -> SolveOutcome {
    let failed = report.best.is_none() || unreachable(&report);
    SolveOutcome {
        best: report.best.clone(),
        epsilon: Some(report.hallucination_rate),
        failed,
        report: Some(report),
    }
}

fn solve_with_gate(
    algorithm: Algorithm,
    scenario: &Scenario,
    configs: &AlgorithmConfigs,
    seed: u64,
    gate: &Arc<RequestGate>,
) -> Result<SolveOutcome> {
    let plain = |best: Individual| SolveOutcome {
        best: Some(best),
        epsilon: None,
        report: None,
        failed: false,
    };
    Ok(match algorithm {
        Algorithm::Greedy => plain(solve_greedy(scenario)),
        Algorithm::Random => plain(solve_random(scenario, &mut ChaCha8Rng::seed_from_u64(seed))),
        Algorithm::Exact => plain(solve_exact_with(scenario, &configs.exact)?),
        Algorithm::Genetic => {
            let config = GeneticConfig {
                seed,
                ..configs.genetic.clone()
            };
            plain(solve_genetic(scenario, &config)?.best)
        }
        Algorithm::Laura => {
            let mut generator = make_generator(&configs.generator, scenario, seed, gate)?;
            let config = LauraConfig {
                seed,
                ..configs.laura.clone()
            };
            from_report(run_laura(scenario, &config, &mut generator)?)
        }
        Algorithm::Ledma => {
            let mut generator = make_generator(&configs.generator, scenario, seed, gate)?;
            from_report(run_ledma(scenario, configs.ledma.samples, &mut generator)?)
        }
    })
}

/// Single solve with the same seeding rules the suite uses.
pub fn solve_once(algorithm: Algorithm, scenario: &Scenario, configs: &AlgorithmConfigs, seed: u64) -> Result<SolveOutcome> {
    solve_with_gate(algorithm, scenario, configs, seed, &Arc::new(RequestGate::new(1)))
}

struct Cell {
    algorithm: Algorithm,
    n: usize,
    case: usize,
    run: usize,
}

struct CellResult {
    record: RunRecord,
    route: Option<Route>,
    report: Option<SolverReport>,
}

fn run_cell(cell: &Cell, scenario: &Scenario, config: &SuiteConfig, gate: &Arc<RequestGate>) -> CellResult {
    let seed = run_seed(config.base_seed, cell.n, cell.case, cell.run, cell.algorithm);
    let started = Instant::now();
    let outcome = solve_with_gate(cell.algorithm, scenario, &config.configs, seed, gate);
    let wall_time_s = started.elapsed().as_secs_f64();
    let (outcome, failed) = match outcome {
        Ok(o) => {
            let failed = o.failed;
            (Some(o), failed)
        }
        Err(e) => {
            log::warn!(
                "{} n={} case={} run={} failed: {e}",
                cell.algorithm,
                cell.n,
                cell.case,
                cell.run
            );
            (None, true)
        }
    };
    let best = outcome.as_ref().and_then(|o| o.best.clone());
    CellResult {
        record: RunRecord {
            algorithm: cell.algorithm,
            n: cell.n,
            case: cell.case,
            run: cell.run,
            seed,
            best_omega: best.as_ref().map(|b| b.omega),
            travel_objective: best.as_ref().and_then(|b| route_objective(scenario, &b.route).ok()),
            epsilon: outcome.as_ref().and_then(|o| o.epsilon),
            wall_time_s,
            failed,
        },
        route: best.map(|b| b.route),
        report: outcome.and_then(|o| o.report),
    }
}

/// Runs the whole suite and, when `config.output_dir` is set, writes
/// `records.csv`, `summary.json`, the generated scenarios, route plots and
/// engine traces for case 0 / run 0.
pub fn run_experiment(config: &SuiteConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let mut scenarios = Vec::new();
    let mut cases = Vec::new();
    for &n in &config.node_counts {
        for case in 0..config.cases_per_count {
            let seed = scenario_seed(config.base_seed, case);
            scenarios.push(((n, case), generate_scenario(n, config.scenario.radius_m, seed, &config.scenario)?));
            cases.push(CaseInfo { n, case, scenario_seed: seed });
        }
    }
    let scenario_for = |n: usize, case: usize| -> &Scenario {
        &scenarios.iter().find(|((m, c), _)| *m == n && *c == case).expect("scenario generated").1
    };

    let mut cells = Vec::new();
    for &n in &config.node_counts {
        for &algorithm in &config.algorithms {
            for case in 0..config.cases_per_count {
                for run in 0..config.runs_per_case {
                    cells.push(Cell { algorithm, n, case, run });
                }
            }
        }
    }

    let gate = Arc::new(RequestGate::new(config.max_concurrent_requests));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::State(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<CellResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cell, scenario_for(cell.n, cell.case), config, &gate))
            .collect()
    });
    results.sort_by_key(|r| (r.record.n, r.record.algorithm, r.record.case, r.record.run));

    let records: Vec<RunRecord> = results.iter().map(|r| r.record.clone()).collect();
    let summary = ExperimentSummary {
        base_seed: config.base_seed,
        groups: aggregate(&records),
        cases,
        records,
    };

    if let Some(dir) = &config.output_dir {
        write_artifacts(dir, &summary, &results, &scenarios)?;
    }
    Ok(summary)
}

fn write_artifacts(
    dir: &Path,
    summary: &ExperimentSummary,
    results: &[CellResult],
    scenarios: &[((usize, usize), Scenario)],
) -> Result<()> {
    std::fs::create_dir_all(dir.join("scenarios"))?;
    std::fs::create_dir_all(dir.join("plots"))?;
    std::fs::create_dir_all(dir.join("traces"))?;
    write_records_csv(dir.join("records.csv"), &summary.records)?;
    std::fs::write(dir.join("summary.json"), summary.to_json() + "\n")?;
    for ((n, case), scenario) in scenarios {
        scenario.save(dir.join("scenarios").join(format!("n{n}_case{case}.json")))?;
    }
    for r in results.iter().filter(|r| r.record.case == 0 && r.record.run == 0) {
        let rec = &r.record;
        let scenario = &scenarios
            .iter()
            .find(|((n, c), _)| *n == rec.n && *c == rec.case)
            .expect("scenario generated")
            .1;
        if let Some(route) = &r.route {
            plot_route(scenario, route, dir.join("plots").join(format!("{}_n{}_case0.svg", rec.algorithm, rec.n)))?;
        }
        if let Some(report) = &r.report {
            let file = std::fs::File::create(dir.join("traces").join(format!("{}_n{}_case0_run0.csv", rec.algorithm, rec.n)))?;
            report.write_trace_csv(file)?;
        }
    }
    Ok(())
}

pub fn write_records_csv(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
