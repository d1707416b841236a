//! Command-line interface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use evotime_core::algorithm::run_detailed;
use evotime_core::problems::TimeRatio;
use evotime_core::search::SearchConfig;
use evotime_core::{AlgorithmId, RunConfig, Termination};
use serde::Serialize;

use crate::experiment::{summarize, CellKind, Experiment, ExperimentFile, ListOrString, DEFAULT_MAX_EVALUATIONS};
use crate::output::{write_events, write_json, write_rows, ResultRow};
use crate::problem::{ProblemFile, ProblemSpec};

/// Exit status for a search that found no solving population size.
pub const EXIT_FAILED: u8 = 2;
/// Exit status for invalid configuration.
pub const EXIT_USAGE: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "evotime", version, about = "Simulate parallel evolutionary algorithms with genotype-dependent evaluation times")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation.
    Run(RunArgs),
    /// Find the smallest population size that solves the problem.
    Bisect(SearchArgs),
    /// Find the population size with the shortest time to solution.
    Goldensection(SearchArgs),
    /// Run a grid of algorithms, problems, ratios and seeds.
    Matrix(MatrixArgs),
    /// Write a problem instance as JSON.
    GenProblem(GenArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Algorithm, e.g. `ga.async.ss.ux`, `ecga.sync.gen`, `gomea.ai`.
    #[arg(long)]
    pub algo: String,
    /// `dt:l=50,k=5`, `ankl:l=40,k=5,stride=2,seed=1` or an instance JSON file.
    #[arg(long)]
    pub problem: String,
    /// Evaluation-time ratio `a:b` (complement cost : optimum cost).
    #[arg(long, default_value = "1:1")]
    pub ratio: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated processors; defaults to the population size.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS)]
    pub max_evals: u64,
    /// Cap on simulated time.
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Stop after more than 2e + 10·|P| evaluations without improvement.
    #[arg(long)]
    pub stagnation: bool,
    /// GOMEA: evaluate mixing steps that leave the genotype unchanged.
    #[arg(long)]
    pub charge_noop_evals: bool,
    /// Write the result row here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub pop: usize,
    /// Write the simulator event log as CSV.
    #[arg(long)]
    pub event_log: Option<PathBuf>,
    /// Write every learned model (ECGA partitions / GOMEA families of subsets) as JSON.
    #[arg(long)]
    pub models: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 8)]
    pub base_pop: usize,
    #[arg(long, default_value_t = 4)]
    pub min_pop: usize,
    #[arg(long, default_value_t = 4096)]
    pub max_pop: usize,
    /// Write every probed population size as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Experiment file (TOML); the options below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<CellKind>,
    /// Comma-separated algorithms.
    #[arg(long)]
    pub algos: Option<String>,
    /// Semicolon-separated problems.
    #[arg(long)]
    pub problems: Option<String>,
    /// `standard` or comma-separated `a:b` ratios.
    #[arg(long)]
    pub ratios: Option<String>,
    /// `0..20`, `1..=5` or `1,2,3`.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub max_evals: Option<u64>,
    #[arg(long)]
    pub max_time: Option<f64>,
    #[arg(long)]
    pub max_pop: Option<usize>,
    /// Parallel simulations.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Per-cell results CSV (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary with quartiles and test decisions.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

struct Resolved {
    algorithm: AlgorithmId,
    spec: ProblemSpec,
    ratio: TimeRatio,
    config: RunConfig,
}

fn resolve(c: &Common, pop: usize) -> Result<Resolved> {
    let algorithm: AlgorithmId = c.algo.parse()?;
    let spec: ProblemSpec = c.problem.parse()?;
    let ratio: TimeRatio = c.ratio.parse()?;
    let mut config = RunConfig::new(algorithm, pop, c.seed);
    config.workers = c.workers;
    config.termination = Termination {
        max_time: c.max_time,
        max_evaluations: Some(c.max_evals),
        stagnation: c.stagnation,
    };
    config.charge_noop_evals = c.charge_noop_evals;
    Ok(Resolved {
        algorithm,
        spec,
        ratio,
        config,
    })
}

fn row(r: &Resolved, pop_size: String, success: bool, time: Option<f64>, evaluations: u64) -> ResultRow {
    ResultRow {
        algorithm: r.algorithm.to_string(),
        problem: r.spec.to_string(),
        ratio: r.ratio.to_string(),
        seed: r.config.seed,
        pop_size,
        success,
        simulated_time: time,
        evaluations,
    }
}

/// Outcome of a command: `Ok(true)` when a search failed to find a solving
/// population size.
fn cmd_run(a: &RunArgs) -> Result<bool> {
    let mut r = resolve(&a.common, a.pop)?;
    r.config.record_events = a.event_log.is_some();
    r.config.record_models = a.models.is_some();
    let problem = r.spec.instance(r.ratio)?;
    let report = run_detailed(&problem, &r.config)?;
    if let Some(path) = &a.event_log {
        write_events(output(Some(path))?, &report.stats.events)?;
    }
    if let Some(path) = &a.models {
        write_json(output(Some(path))?, &report.models)?;
    }
    let s = &report.stats;
    let line = row(
        &r,
        a.pop.to_string(),
        s.success(),
        Some(s.simulated_time),
        s.evaluations_issued,
    );
    write_rows(output(a.common.out.as_ref())?, &[line])?;
    Ok(false)
}

#[derive(Serialize)]
struct TraceRow {
    pop_size: usize,
    success: bool,
    simulated_time: f64,
    evaluations: u64,
}

fn cmd_search(a: &SearchArgs, kind: CellKind) -> Result<bool> {
    let r = resolve(&a.common, a.base_pop)?;
    let exp = Experiment {
        kind,
        algorithms: vec![r.algorithm],
        problems: vec![r.spec.clone()],
        ratios: vec![r.ratio],
        seeds: vec![r.config.seed],
        population: None,
        workers: r.config.workers,
        termination: r.config.termination,
        charge_noop_evals: r.config.charge_noop_evals,
        search: SearchConfig {
            base: a.base_pop,
            min_pop: a.min_pop,
            max_pop: a.max_pop,
        },
        alpha: 0.05,
    };
    exp.validate()?;
    let cell = exp.cells().remove(0);
    let result = exp.run_cell(&cell)?;
    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_writer(output(Some(path))?);
        for p in &result.trace {
            w.serialize(TraceRow {
                pop_size: p.pop_size,
                success: p.success,
                simulated_time: p.simulated_time,
                evaluations: p.evaluations,
            })?;
        }
        w.flush()?;
    }
    let line = crate::experiment::CellOutcome::Done(result.clone()).row(&cell);
    write_rows(output(a.common.out.as_ref())?, &[line])?;
    Ok(!result.success)
}

fn cmd_matrix(a: &MatrixArgs) -> Result<bool> {
    let mut file = match &a.config {
        Some(p) => ExperimentFile::load(p)?,
        None => ExperimentFile {
            kind: CellKind::Bisect,
            algorithms: Vec::new(),
            problems: Vec::new(),
            ratios: ListOrString::String("standard".into()),
            seeds: ListOrString::String("0..1".into()),
            population: None,
            workers: None,
            max_evaluations: None,
            max_time: None,
            stagnation: false,
            charge_noop_evals: false,
            base_pop: None,
            min_pop: None,
            max_pop: None,
            alpha: None,
        },
    };
    if let Some(k) = a.kind {
        file.kind = k;
    }
    if let Some(s) = &a.algos {
        file.algorithms = s.split(',').map(|x| x.trim().to_string()).collect();
    }
    if let Some(s) = &a.problems {
        file.problems = s.split(';').map(|x| x.trim().to_string()).collect();
    }
    if let Some(s) = &a.ratios {
        file.ratios = ListOrString::String(s.clone());
    }
    if let Some(s) = &a.seeds {
        file.seeds = ListOrString::String(s.clone());
    }
    file.population = a.pop.or(file.population);
    file.workers = a.workers.or(file.workers);
    file.max_evaluations = a.max_evals.or(file.max_evaluations);
    file.max_time = a.max_time.or(file.max_time);
    file.max_pop = a.max_pop.or(file.max_pop);
    let exp = file.resolve()?;
    let results = exp.run(a.jobs)?;
    for (cell, outcome) in &results {
        if let crate::experiment::CellOutcome::Error(e) = outcome {
            eprintln!("cell {} {} {} seed {} failed: {e}", cell.algorithm, cell.problem, cell.ratio, cell.seed);
        }
    }
    let rows: Vec<ResultRow> = results.iter().map(|(c, o)| o.row(c)).collect();
    write_rows(output(a.out.as_ref())?, &rows)?;
    if let Some(path) = &a.summary {
        write_json(output(Some(path))?, &summarize(&exp, &results)?)?;
    }
    Ok(false)
}

fn cmd_gen(a: &GenArgs) -> Result<bool> {
    let spec: ProblemSpec = a.problem.parse()?;
    let file = ProblemFile::from_spec(&spec)?;
    let mut out = output(a.out.as_ref())?;
    writeln!(out, "{}", file.to_json()?)?;
    Ok(false)
}

pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bisect(a) => cmd_search(a, CellKind::Bisect),
        Command::Goldensection(a) => cmd_search(a, CellKind::Golden),
        Command::Matrix(a) => cmd_matrix(a),
        Command::GenProblem(a) => cmd_gen(a),
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(false) => 0,
        Ok(true) => EXIT_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
