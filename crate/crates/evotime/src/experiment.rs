//! Experiment matrix: algorithms × problems × ratios × seeds, each cell a
//! single run or a population-size search, with aggregate statistics.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use evotime_core::problems::TimeRatio;
use evotime_core::search::{bisect_runs, golden_min_time, Probe, SearchConfig};
use evotime_core::stats::{holm_bonferroni, mann_whitney_u, quartiles, Quartiles};
use evotime_core::{algorithm, AlgorithmId, RunConfig, Termination};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{ResultRow, FAILED};
use crate::problem::{parse_ratios, parse_seeds, ProblemSpec};

pub const DEFAULT_MAX_EVALUATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// One run at a fixed population size.
    Run,
    /// Smallest solving population size.
    Bisect,
    /// Population size with the shortest time to solution.
    Golden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ListOrString<T> {
    List(Vec<T>),
    String(String),
}

/// Declarative experiment file (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default = "default_kind")]
    pub kind: CellKind,
    pub algorithms: Vec<String>,
    pub problems: Vec<String>,
    pub ratios: ListOrString<String>,
    pub seeds: ListOrString<u64>,
    pub population: Option<usize>,
    pub workers: Option<usize>,
    pub max_evaluations: Option<u64>,
    pub max_time: Option<f64>,
    #[serde(default)]
    pub stagnation: bool,
    #[serde(default)]
    pub charge_noop_evals: bool,
    pub base_pop: Option<usize>,
    pub min_pop: Option<usize>,
    pub max_pop: Option<usize>,
    pub alpha: Option<f64>,
}

fn default_kind() -> CellKind {
    CellKind::Bisect
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let algorithms = self
            .algorithms
            .iter()
            .map(|a| a.parse::<AlgorithmId>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;
        let problems = self
            .problems
            .iter()
            .map(|p| p.parse::<ProblemSpec>())
            .collect::<Result<Vec<_>>>()?;
        let ratios = match &self.ratios {
            ListOrString::String(s) => parse_ratios(s)?,
            ListOrString::List(l) => l
                .iter()
                .map(|r| r.parse::<TimeRatio>().map_err(anyhow::Error::from))
                .collect::<Result<Vec<_>>>()?,
        };
        let seeds = match &self.seeds {
            ListOrString::String(s) => parse_seeds(s)?,
            ListOrString::List(l) => l.clone(),
        };
        let defaults = SearchConfig::default();
        let exp = Experiment {
            kind: self.kind,
            algorithms,
            problems,
            ratios,
            seeds,
            population: self.population,
            workers: self.workers,
            termination: Termination {
                max_time: self.max_time,
                max_evaluations: Some(self.max_evaluations.unwrap_or(DEFAULT_MAX_EVALUATIONS)),
                stagnation: self.stagnation,
            },
            charge_noop_evals: self.charge_noop_evals,
            search: SearchConfig {
                base: self.base_pop.unwrap_or(defaults.base),
                min_pop: self.min_pop.unwrap_or(defaults.min_pop),
                max_pop: self.max_pop.unwrap_or(defaults.max_pop),
            },
            alpha: self.alpha.unwrap_or(0.05),
        };
        exp.validate()?;
        Ok(exp)
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub kind: CellKind,
    pub algorithms: Vec<AlgorithmId>,
    pub problems: Vec<ProblemSpec>,
    pub ratios: Vec<TimeRatio>,
    pub seeds: Vec<u64>,
    pub population: Option<usize>,
    pub workers: Option<usize>,
    pub termination: Termination,
    pub charge_noop_evals: bool,
    pub search: SearchConfig,
    pub alpha: f64,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.algorithms.is_empty(), "no algorithms given");
        ensure!(!self.problems.is_empty(), "no problems given");
        ensure!(!self.ratios.is_empty(), "no ratios given");
        ensure!(!self.seeds.is_empty(), "no seeds given");
        match self.kind {
            CellKind::Run => {
                let p = self.population.context("run cells need a population size")?;
                RunConfig::new(self.algorithms[0], p, 0).validate()?;
            }
            CellKind::Bisect | CellKind::Golden => self.search.validate()?,
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            for problem in &self.problems {
                for &ratio in &self.ratios {
                    for &seed in &self.seeds {
                        out.push(Cell {
                            algorithm,
                            problem: problem.clone(),
                            ratio,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }

    fn run_config(&self, cell: &Cell, population: usize) -> RunConfig {
        let mut c = RunConfig::new(cell.algorithm, population, cell.seed);
        c.workers = self.workers;
        c.termination = self.termination;
        c.charge_noop_evals = self.charge_noop_evals;
        c
    }

    /// Runs one cell.
    pub fn run_cell(&self, cell: &Cell) -> Result<CellResult> {
        let problem = cell.problem.instance(cell.ratio)?;
        match self.kind {
            CellKind::Run => {
                let pop = self.population.context("run cells need a population size")?;
                let stats = algorithm::run(&problem, &self.run_config(cell, pop))?;
                Ok(CellResult {
                    pop_size: Some(pop),
                    max_probed: pop,
                    success: stats.success(),
                    simulated_time: Some(stats.simulated_time),
                    evaluations: stats.evaluations_issued,
                    trace: vec![Probe {
                        pop_size: pop,
                        success: stats.success(),
                        simulated_time: stats.simulated_time,
                        evaluations: stats.evaluations_issued,
                    }],
                })
            }
            CellKind::Bisect => {
                let template = self.run_config(cell, self.search.base);
                let r = bisect_runs(&problem, &template, &self.search)?;
                let reported = r
                    .minimal
                    .unwrap_or_else(|| r.max_probed());
                let probe = r.trace.iter().rev().find(|p| p.pop_size == reported).copied();
                Ok(CellResult {
                    pop_size: r.minimal,
                    max_probed: r.max_probed(),
                    success: r.minimal.is_some(),
                    simulated_time: probe.filter(|p| p.success).map(|p| p.simulated_time),
                    evaluations: probe.map_or(0, |p| p.evaluations),
                    trace: r.trace,
                })
            }
            CellKind::Golden => {
                let mut trace = Vec::new();
                let r = golden_min_time(&self.search, |p| {
                    let stats = algorithm::run(&problem, &self.run_config(cell, p))?;
                    trace.push(Probe {
                        pop_size: p,
                        success: stats.success(),
                        simulated_time: stats.simulated_time,
                        evaluations: stats.evaluations_issued,
                    });
                    Ok(stats.success().then_some(stats.simulated_time))
                })?;
                let max_probed = trace.iter().map(|p| p.pop_size).max().unwrap_or(0);
                let best = r.best;
                let evaluations = best
                    .and_then(|(p, _)| trace.iter().find(|t| t.pop_size == p))
                    .map_or(0, |t| t.evaluations);
                Ok(CellResult {
                    pop_size: best.map(|b| b.0),
                    max_probed,
                    success: best.is_some(),
                    simulated_time: best.map(|b| b.1),
                    evaluations,
                    trace,
                })
            }
        }
    }

    /// Runs every cell on `jobs` threads. Results are in cell order and do not
    /// depend on `jobs`.
    pub fn run(&self, jobs: usize) -> Result<Vec<(Cell, CellOutcome)>> {
        let cells = self.cells();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
        let results: Vec<CellOutcome> = pool.install(|| {
            cells
                .par_iter()
                .map(|c| match self.run_cell(c) {
                    Ok(r) => CellOutcome::Done(r),
                    Err(e) => CellOutcome::Error(format!("{e:#}")),
                })
                .collect()
        });
        Ok(cells.into_iter().zip(results).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub algorithm: AlgorithmId,
    pub problem: ProblemSpec,
    pub ratio: TimeRatio,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    /// Reported population size; `None` if the cell failed.
    pub pop_size: Option<usize>,
    pub max_probed: usize,
    pub success: bool,
    pub simulated_time: Option<f64>,
    pub evaluations: u64,
    pub trace: Vec<Probe>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(CellResult),
    Error(String),
}

impl CellOutcome {
    pub fn row(&self, cell: &Cell) -> ResultRow {
        let base = |pop_size: String, success, simulated_time, evaluations| ResultRow {
            algorithm: cell.algorithm.to_string(),
            problem: cell.problem.to_string(),
            ratio: cell.ratio.to_string(),
            seed: cell.seed,
            pop_size,
            success,
            simulated_time,
            evaluations,
        };
        match self {
            CellOutcome::Done(r) => base(
                r.pop_size.map_or_else(|| FAILED.to_string(), |p| p.to_string()),
                r.success,
                r.simulated_time,
                r.evaluations,
            ),
            CellOutcome::Error(_) => base(FAILED.to_string(), false, None, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileSummary {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl From<Quartiles> for QuartileSummary {
    fn from(q: Quartiles) -> Self {
        Self {
            q25: q.q25,
            median: q.median,
            q75: q.q75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub algorithm: String,
    pub problem: String,
    pub ratio: String,
    pub cells: usize,
    pub failed: usize,
    /// Population sizes of successful cells only.
    pub pop_size_excluding_failed: Option<QuartileSummary>,
    /// Failed cells counted at the largest population size they tried.
    pub pop_size_failed_as_max: Option<QuartileSummary>,
    pub simulated_time: Option<QuartileSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub algorithm: String,
    pub problem: String,
    pub ratio_a: String,
    pub ratio_b: String,
    pub u: f64,
    pub p: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub kind: CellKind,
    pub alpha: f64,
    pub groups: Vec<GroupSummary>,
    /// Two-sided Mann-Whitney U tests between every pair of ratios of an
    /// (algorithm, problem) combination, Holm-Bonferroni corrected within it.
    pub tests: Vec<PairTest>,
}

/// The per-cell value compared between ratios: population size for
/// searches (failures at the largest size tried), time for single runs.
fn metric(kind: CellKind, outcome: &CellOutcome) -> Option<f64> {
    let CellOutcome::Done(r) = outcome else {
        return None;
    };
    match kind {
        CellKind::Bisect => Some(r.pop_size.unwrap_or(r.max_probed) as f64),
        CellKind::Golden | CellKind::Run => r.success.then_some(r.simulated_time?),
    }
}

pub fn summarize(exp: &Experiment, results: &[(Cell, CellOutcome)]) -> Result<Summary> {
    type Key = (String, String, String);
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&(Cell, CellOutcome)>> = BTreeMap::new();
    let index = |cell: &Cell| -> (usize, usize, usize) {
        (
            exp.algorithms.iter().position(|a| *a == cell.algorithm).unwrap_or(0),
            exp.problems.iter().position(|p| *p == cell.problem).unwrap_or(0),
            exp.ratios.iter().position(|r| *r == cell.ratio).unwrap_or(0),
        )
    };
    for r in results {
        groups.entry(index(&r.0)).or_default().push(r);
    }
    let key = |cell: &Cell| -> Key { (cell.algorithm.to_string(), cell.problem.to_string(), cell.ratio.to_string()) };

    let mut summaries = Vec::new();
    let mut metrics: BTreeMap<(usize, usize), Vec<(usize, Vec<f64>)>> = BTreeMap::new();
    for (&(a, p, r), members) in &groups {
        let (algorithm, problem, ratio) = key(&members[0].0);
        let done: Vec<&CellResult> = members
            .iter()
            .filter_map(|(_, o)| match o {
                CellOutcome::Done(r) => Some(r),
                CellOutcome::Error(_) => None,
            })
            .collect();
        let ok: Vec<f64> = done.iter().filter_map(|r| r.pop_size.map(|p| p as f64)).collect();
        let as_max: Vec<f64> = done
            .iter()
            .map(|r| r.pop_size.unwrap_or(r.max_probed) as f64)
            .collect();
        let times: Vec<f64> = done.iter().filter(|r| r.success).filter_map(|r| r.simulated_time).collect();
        summaries.push(GroupSummary {
            algorithm,
            problem,
            ratio,
            cells: members.len(),
            failed: members.len() - ok.len(),
            pop_size_excluding_failed: quartiles(&ok).map(Into::into),
            pop_size_failed_as_max: quartiles(&as_max).map(Into::into),
            simulated_time: quartiles(&times).map(Into::into),
        });
        let values: Vec<f64> = members.iter().filter_map(|(_, o)| metric(exp.kind, o)).collect();
        metrics.entry((a, p)).or_default().push((r, values));
    }

    let mut tests = Vec::new();
    for (&(a, p), per_ratio) in &metrics {
        let mut pending = Vec::new();
        for i in 0..per_ratio.len() {
            for j in i + 1..per_ratio.len() {
                let (ri, xi) = &per_ratio[i];
                let (rj, xj) = &per_ratio[j];
                if xi.is_empty() || xj.is_empty() {
                    continue;
                }
                let mw = mann_whitney_u(xi, xj)?;
                pending.push((*ri, *rj, mw.u, mw.p));
            }
        }
        let pvalues: Vec<f64> = pending.iter().map(|t| t.3).collect();
        let reject = holm_bonferroni(&pvalues, exp.alpha)?;
        for ((ri, rj, u, pv), rej) in pending.into_iter().zip(reject) {
            tests.push(PairTest {
                algorithm: exp.algorithms[a].to_string(),
                problem: exp.problems[p].to_string(),
                ratio_a: exp.ratios[ri].to_string(),
                ratio_b: exp.ratios[rj].to_string(),
                u,
                p: pv,
                reject: rej,
            });
        }
    }

    Ok(Summary {
        kind: exp.kind,
        alpha: exp.alpha,
        groups: summaries,
        tests,
    })
}
