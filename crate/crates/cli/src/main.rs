use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use laura_core::bench::{plot_route, run_experiment, solve_once, Algorithm, AlgorithmConfigs, SuiteConfig};
use laura_core::engine::SolverReport;
use laura_core::evo::{verify, verify_structure, DEFAULT_OMEGA_TOLERANCE};
use laura_core::{evaluate_route, generate_scenario, route_objective, CandidateIndividual, Scenario, ScenarioDefaults};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "laura", version, about = "AoI-aware UAV route planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random scenario inside a disk around the data center.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3000.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// TOML file with scenario defaults (altitude, speed, radio, ...).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one scenario with one algorithm and write a JSON report.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_algorithm)]
        algo: Algorithm,
        /// TOML file with per-algorithm settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run a comparison suite described by a TOML file.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a route against a scenario; exits non-zero when it is rejected.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Route such as "[0, 2, 1, 0]".
        #[arg(long)]
        route: String,
        /// Claimed maximum AoI to check as well.
        #[arg(long)]
        omega: Option<f64>,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: laura_core::Error| e.to_string())
}

#[derive(Serialize)]
struct SolveReport {
    algorithm: Algorithm,
    seed: u64,
    n: usize,
    failed: bool,
    best_route: Option<Vec<usize>>,
    best_omega: Option<f64>,
    travel_objective: Option<f64>,
    per_node_aoi: Option<Vec<f64>>,
    mission_time_s: Option<f64>,
    epsilon: Option<f64>,
    wall_time_s: f64,
    engine: Option<SolverReport>,
}

fn solve(scenario: &Scenario, algo: Algorithm, configs: &AlgorithmConfigs, seed: u64) -> anyhow::Result<SolveReport> {
    let started = Instant::now();
    let outcome = solve_once(algo, scenario, configs, seed)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    let profile = match &outcome.best {
        Some(b) => Some(evaluate_route(scenario, &b.route)?),
        None => None,
    };
    let travel = match &outcome.best {
        Some(b) => Some(route_objective(scenario, &b.route)?),
        None => None,
    };
    Ok(SolveReport {
        algorithm: algo,
        seed,
        n: scenario.n(),
        failed: outcome.failed,
        best_route: outcome.best.as_ref().map(|b| b.route.to_indices()),
        best_omega: outcome.best.as_ref().map(|b| b.omega),
        travel_objective: travel,
        per_node_aoi: profile.as_ref().map(|p| p.per_node_aoi.clone()),
        mission_time_s: profile.map(|p| p.mission_time),
        epsilon: outcome.epsilon,
        wall_time_s,
        engine: outcome.report,
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate {
            n,
            radius,
            seed,
            config,
            out,
        } => {
            let defaults: ScenarioDefaults = match config {
                Some(path) => toml::from_str(&std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?)?,
                None => ScenarioDefaults::default(),
            };
            let scenario = generate_scenario(n, radius, seed, &defaults)?;
            for w in scenario.warnings() {
                log::warn!("{w:?}");
            }
            scenario.save(&out).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Solve {
            scenario,
            algo,
            config,
            seed,
            out,
            plot,
        } => {
            let scenario = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let configs: AlgorithmConfigs = match config {
                Some(path) => toml::from_str(&std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?)?,
                None => AlgorithmConfigs::default(),
            };
            let report = solve(&scenario, algo, &configs, seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = plot {
                match report.best_route.as_deref() {
                    Some(route) => plot_route(&scenario, &laura_core::Route::new(route, scenario.n())?, &path)?,
                    None => bail!("no route to plot: the run produced no valid solution"),
                }
            }
            match report.best_omega {
                Some(omega) if !report.failed => println!("{algo}: max AoI {omega:.6} s"),
                _ => {
                    eprintln!("{algo}: run failed");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Bench { suite, out } => {
            let mut config = SuiteConfig::load(&suite).with_context(|| format!("loading {}", suite.display()))?;
            config.output_dir = Some(out);
            let summary = run_experiment(&config)?;
            for g in &summary.groups {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{:<8} n={:<3} runs={:<3} failed={:<3} mean={} var={} eps={}",
                    g.algorithm.name(),
                    g.n,
                    g.runs,
                    g.failed_runs,
                    fmt(g.mean_omega),
                    fmt(g.variance_omega),
                    fmt(g.mean_epsilon)
                );
            }
        }
        Command::Verify { scenario, route, omega } => {
            let scenario = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let ids: Vec<usize> = serde_json::from_str(route.trim()).context("route must be a list such as \"[0, 1, 0]\"")?;
            let candidate = CandidateIndividual::new(ids, omega);
            let verdict = match omega {
                Some(_) => verify(&scenario, &candidate, DEFAULT_OMEGA_TOLERANCE),
                None => verify_structure(&scenario, &candidate),
            };
            match verdict {
                Ok(ind) => println!("valid: max AoI {:.6} s", ind.omega),
                Err(e) => {
                    println!("rejected: {e}");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
