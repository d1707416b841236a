//! Benchmark fitness functions and the genotype-dependent evaluation-time model.

mod ankl;
mod time_model;
mod trap;

use alloc::vec::Vec;

pub use ankl::{generate_ankl, AnklProblem};
pub use time_model::{make_time_model, TimeModel, TimeRatio};
pub use trap::{dt_block, DeceptiveTrap};

use crate::error::{Error, Result};
use crate::genotype::Genotype;

#[derive(Debug, Clone, PartialEq)]
pub enum FitnessFunction {
    Trap(DeceptiveTrap),
    Ankl(AnklProblem),
}

impl FitnessFunction {
    pub fn len(&self) -> usize {
        match self {
            FitnessFunction::Trap(p) => p.len(),
            FitnessFunction::Ankl(p) => p.len(),
        }
    }

    pub fn optimum(&self) -> Genotype {
        match self {
            FitnessFunction::Trap(p) => p.optimum(),
            FitnessFunction::Ankl(p) => p.optimum().clone(),
        }
    }

    pub fn optimum_value(&self) -> f64 {
        match self {
            FitnessFunction::Trap(p) => p.optimum_value(),
            FitnessFunction::Ankl(p) => p.optimum_value(),
        }
    }

    fn partition(&self) -> Vec<Vec<usize>> {
        match self {
            FitnessFunction::Trap(p) => p.blocks(),
            FitnessFunction::Ankl(p) => p.crossover_partition(),
        }
    }

    #[inline]
    fn fitness_unchecked(&self, g: &Genotype) -> f64 {
        match self {
            FitnessFunction::Trap(p) => p.fitness_unchecked(g),
            FitnessFunction::Ankl(p) => p.fitness_unchecked(g),
        }
    }
}

/// A fitness function together with its target value, time model and the
/// disjoint variable partition used by subfunction crossover.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    function: FitnessFunction,
    target: f64,
    time_model: TimeModel,
    partition: Vec<Vec<usize>>,
}

impl ProblemInstance {
    /// Target is the known optimum value and the time model is centred on the
    /// known optimum.
    pub fn new(function: FitnessFunction, ratio: TimeRatio) -> Result<Self> {
        let time_model = make_time_model(ratio, function.optimum())?;
        Ok(Self {
            target: function.optimum_value(),
            partition: function.partition(),
            function,
            time_model,
        })
    }

    pub fn trap(len: usize, k: usize, ratio: TimeRatio) -> Result<Self> {
        Self::new(FitnessFunction::Trap(DeceptiveTrap::with_length(len, k)?), ratio)
    }

    pub fn ankl(problem: AnklProblem, ratio: TimeRatio) -> Result<Self> {
        Self::new(FitnessFunction::Ankl(problem), ratio)
    }

    pub fn function(&self) -> &FitnessFunction {
        &self.function
    }

    pub fn len(&self) -> usize {
        self.function.len()
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn time_model(&self) -> &TimeModel {
        &self.time_model
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Same instance with a different time ratio.
    pub fn with_ratio(&self, ratio: TimeRatio) -> Result<Self> {
        Ok(Self {
            time_model: make_time_model(ratio, self.time_model.optimum().clone())?,
            ..self.clone()
        })
    }

    pub fn is_success(&self, fitness: f64) -> bool {
        fitness >= self.target
    }

    /// Returns `(fitness, evaluation time)`.
    pub fn evaluate(&self, g: &Genotype) -> Result<(f64, f64)> {
        if g.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: g.len(),
            });
        }
        Ok(self.evaluate_unchecked(g))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, g: &Genotype) -> (f64, f64) {
        (
            self.function.fitness_unchecked(g),
            self.time_model.eval_time_unchecked(g),
        )
    }
}
