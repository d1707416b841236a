//! Algorithm identifiers and single-run configuration.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ecga::Ecga;
use crate::engine::{EngineConfig, Mode, RunStats, Simulation, Termination};
use crate::error::{invalid, Error, Result};
use crate::ga::{Crossover, CrossoverKind, Ga, Survival};
use crate::gomea::{Gomea, GomeaVariant};
use crate::problems::ProblemInstance;

/// One of the implemented algorithm configurations, written as
/// `ga.<sync|async>.<ss|gen>.<ux|tpx|sfx>`, `ecga.<sync|async>.<ss|gen>` or
/// `gomea.<sync|ae|ai>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Ga {
        mode: Mode,
        survival: Survival,
        crossover: CrossoverKind,
    },
    Ecga {
        mode: Mode,
        survival: Survival,
    },
    Gomea(GomeaVariant),
}

fn mode_str(mode: Mode) -> &'static str {
    match mode {
        Mode::Synchronous => "sync",
        Mode::Asynchronous => "async",
    }
}

impl AlgorithmId {
    /// Every valid identifier.
    pub fn all() -> Vec<AlgorithmId> {
        let modes = [Mode::Synchronous, Mode::Asynchronous];
        let survivals = [Survival::SteadyState, Survival::GenerationalPool];
        let kinds = [CrossoverKind::Uniform, CrossoverKind::TwoPoint, CrossoverKind::Subfunction];
        let mut out = Vec::new();
        for mode in modes {
            for survival in survivals {
                for crossover in kinds {
                    out.push(AlgorithmId::Ga {
                        mode,
                        survival,
                        crossover,
                    });
                }
            }
        }
        for mode in modes {
            for survival in survivals {
                out.push(AlgorithmId::Ecga { mode, survival });
            }
        }
        for v in [GomeaVariant::Sync, GomeaVariant::AsyncEnd, GomeaVariant::AsyncIntermediate] {
            out.push(AlgorithmId::Gomea(v));
        }
        out
    }

    pub fn mode(self) -> Mode {
        match self {
            AlgorithmId::Ga { mode, .. } | AlgorithmId::Ecga { mode, .. } => mode,
            AlgorithmId::Gomea(v) => v.mode(),
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AlgorithmId::Ga {
                mode,
                survival,
                crossover,
            } => write!(f, "ga.{}.{}.{}", mode_str(mode), survival.as_str(), crossover.as_str()),
            AlgorithmId::Ecga { mode, survival } => write!(f, "ecga.{}.{}", mode_str(mode), survival.as_str()),
            AlgorithmId::Gomea(v) => write!(f, "gomea.{}", v.as_str()),
        }
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase();
        AlgorithmId::all()
            .into_iter()
            .find(|id| id.to_string() == wanted)
            .ok_or_else(|| Error::UnknownAlgorithm {
                given: s.to_string(),
                valid: AlgorithmId::all()
                    .iter()
                    .map(|id| id.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmId,
    pub population_size: usize,
    /// Simulated processors; `None` means one per population member.
    pub workers: Option<usize>,
    pub seed: u64,
    pub termination: Termination,
    pub record_events: bool,
    /// Keep every learned model (ECGA partitions, GOMEA families of subsets).
    pub record_models: bool,
    /// GOMEA: also evaluate steps that leave the genotype unchanged.
    pub charge_noop_evals: bool,
}

impl RunConfig {
    pub fn new(algorithm: AlgorithmId, population_size: usize, seed: u64) -> Self {
        Self {
            algorithm,
            population_size,
            workers: None,
            seed,
            termination: Termination::default(),
            record_events: false,
            record_models: false,
            charge_noop_evals: false,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(self.population_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(invalid(format!(
                "population size must be even and at least 4, got {}",
                self.population_size
            )));
        }
        if self.workers() == 0 {
            return Err(invalid("worker count must be positive"));
        }
        Ok(())
    }
}

/// Result of [`run_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub stats: RunStats,
    /// Learned models in learning order, if requested.
    pub models: Vec<Vec<Vec<usize>>>,
}

/// Runs one simulation.
pub fn run(problem: &ProblemInstance, config: &RunConfig) -> Result<RunStats> {
    run_detailed(problem, config).map(|r| r.stats)
}

pub fn run_detailed(problem: &ProblemInstance, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let engine = EngineConfig {
        workers: config.workers(),
        termination: config.termination,
        record_events: config.record_events,
    };
    let (size, len, seed) = (config.population_size, problem.len(), config.seed);
    let report = match config.algorithm {
        AlgorithmId::Ga {
            mode,
            survival,
            crossover,
        } => {
            let op = match crossover {
                CrossoverKind::Uniform => Crossover::Uniform,
                CrossoverKind::TwoPoint => Crossover::TwoPoint,
                CrossoverKind::Subfunction => Crossover::subfunction(problem.partition().to_vec(), len)?,
            };
            let alg = Ga::new(mode, survival, op, size, len, seed);
            let (stats, _) = Simulation::new(alg, problem, engine).run();
            RunReport {
                stats,
                models: Vec::new(),
            }
        }
        AlgorithmId::Ecga { mode, survival } => {
            let alg = Ecga::new(mode, survival, size, len, seed);
            let (stats, alg) = Simulation::new(alg, problem, engine).run();
            RunReport {
                stats,
                models: if config.record_models {
                    alg.partitions().to_vec()
                } else {
                    Vec::new()
                },
            }
        }
        AlgorithmId::Gomea(variant) => {
            let mut alg = Gomea::new(variant, size, len, seed).with_charge_noop_evals(config.charge_noop_evals);
            if config.record_models {
                alg = alg.with_history();
            }
            let (stats, alg) = Simulation::new(alg, problem, engine).run();
            RunReport {
                stats,
                models: alg.history().to_vec(),
            }
        }
    };
    Ok(report)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::TimeRatio;

    #[test]
    fn identifiers_round_trip() {
        let all = AlgorithmId::all();
        assert_eq!(all.len(), 12 + 4 + 3);
        for id in all {
            assert_eq!(id.to_string().parse::<AlgorithmId>().unwrap(), id);
        }
        assert_eq!(
            "ga.async.ss.ux".parse::<AlgorithmId>().unwrap(),
            AlgorithmId::Ga {
                mode: Mode::Asynchronous,
                survival: Survival::SteadyState,
                crossover: CrossoverKind::Uniform,
            }
        );
    }

    #[test]
    fn unknown_identifier_lists_options() {
        let err = "gomea.fast".parse::<AlgorithmId>().unwrap_err();
        let Error::UnknownAlgorithm { valid, .. } = err else {
            panic!("wrong error");
        };
        assert!(valid.contains("gomea.ai"));
        assert!(valid.contains("ecga.sync.gen"));
        assert!(valid.contains("ga.async.gen.tpx"));
    }

    #[test]
    fn population_size_is_validated() {
        let p = ProblemInstance::trap(10, 5, TimeRatio::new(1.0, 1.0).unwrap()).unwrap();
        let id: AlgorithmId = "gomea.sync".parse().unwrap();
        for bad in [0, 2, 7] {
            assert!(run(&p, &RunConfig::new(id, bad, 1)).is_err());
        }
        assert!(run(&p, &RunConfig::new(id, 8, 1)).is_ok());
    }
}
