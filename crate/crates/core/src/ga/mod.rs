//! Simple GA in four scheme combinations: synchronous or asynchronous, with
//! steady-state or pooled generational survival selection.

mod crossover;
mod selection;

use alloc::vec::Vec;

use rand::Rng;

pub use crossover::{crossover, Crossover, CrossoverKind};
pub use selection::{
    select_generational_pool, select_steady_state, tournament_select, OffspringPool, Survival,
    TOURNAMENT_SIZE,
};

use crate::engine::{Algorithm, Mode, Step, StepContext};
use crate::genotype::{Genotype, Individual, Population};
use crate::rng::RandomSource;

/// Stream domains for [`RandomSource::fork`].
pub(crate) mod streams {
    pub const INIT: u64 = 1;
    pub const TASK: u64 = 2;
    pub const FLUSH: u64 = 3;
    pub const LEARN: u64 = 4;
}

/// Population of placeholders holding the initial random genotypes; slot `i`
/// draws from its own stream.
pub(crate) fn initial_population(size: usize, len: usize, root: &RandomSource) -> Population {
    (0..size)
        .map(|slot| {
            let mut rng = root.fork(streams::INIT, slot as u64);
            Individual::placeholder(Genotype::random(len, &mut rng))
        })
        .collect::<Vec<_>>()
        .into()
}

/// Completes an initialization task: the evaluated solution is stored unless
/// the slot already holds something at least as good (it may have been
/// replaced concurrently).
pub(crate) fn finish_init(pop: &mut Population, slot: usize, s: Individual) {
    if s.fitness > pop.get(slot).fitness {
        pop.set(slot, s);
    }
}

/// Applies the configured survival selection to an evaluated offspring.
pub(crate) fn survive(
    survival: Survival,
    pop: &mut Population,
    pool: &mut OffspringPool,
    s: Individual,
    tag: u64,
    task_rng: &mut RandomSource,
    root: &RandomSource,
) {
    match survival {
        Survival::SteadyState => {
            select_steady_state(pop, s, task_rng);
        }
        Survival::GenerationalPool => {
            let mut flush_rng = root.fork(streams::FLUSH, pool.flushes());
            select_generational_pool(pop, pool, s, tag, &mut flush_rng);
        }
    }
}

/// Two parents drawn uniformly with replacement.
pub(crate) fn sample_parents<'p>(pop: &'p Population, rng: &mut RandomSource) -> (&'p Genotype, &'p Genotype) {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    (&pop.get(a).genotype, &pop.get(b).genotype)
}

#[derive(Debug, Clone)]
pub struct GaTask {
    id: u64,
    rng: RandomSource,
    role: Role,
}

#[derive(Debug, Clone)]
enum Role {
    Init(usize),
    /// Offspring fixed in advance (synchronous batches) or bred at first step.
    Breed(Option<Genotype>),
}

#[derive(Debug, Clone)]
pub struct Ga {
    mode: Mode,
    survival: Survival,
    crossover: Crossover,
    pop: Population,
    pool: OffspringPool,
    root: RandomSource,
    next_id: u64,
}

impl Ga {
    pub fn new(
        mode: Mode,
        survival: Survival,
        crossover: Crossover,
        population_size: usize,
        len: usize,
        seed: u64,
    ) -> Self {
        let root = RandomSource::new(seed);
        Self {
            mode,
            survival,
            crossover,
            pop: initial_population(population_size, len, &root),
            pool: OffspringPool::default(),
            root,
            next_id: 0,
        }
    }

    pub fn pool(&self) -> &OffspringPool {
        &self.pool
    }

    fn task(&mut self, role: Role) -> GaTask {
        let id = self.next_id;
        self.next_id += 1;
        GaTask {
            id,
            rng: self.root.fork(streams::TASK, id),
            role,
        }
    }

    fn breed(&self, rng: &mut RandomSource) -> Genotype {
        let (p0, p1) = sample_parents(&self.pop, rng);
        self.crossover
            .apply(p0, p1, rng)
            .expect("crossover validated at construction")
    }
}

impl Algorithm for Ga {
    type Task = GaTask;

    fn mode(&self) -> Mode {
        self.mode
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn init_task(&mut self, slot: usize) -> GaTask {
        self.task(Role::Init(slot))
    }

    fn generation_tasks(&mut self, _ctx: &StepContext<'_>) -> Vec<GaTask> {
        // Offspring of a synchronous batch are all bred from the population as
        // it stands at the start of the generation.
        (0..self.pop.len())
            .map(|_| {
                let mut t = self.task(Role::Breed(None));
                let child = self.breed(&mut t.rng);
                t.role = Role::Breed(Some(child));
                t
            })
            .collect()
    }

    fn successor(&mut self, _finished: GaTask, _ctx: &StepContext<'_>) -> GaTask {
        self.task(Role::Breed(None))
    }

    fn step(&mut self, task: &mut GaTask, result: Option<Individual>, _ctx: &StepContext<'_>) -> Step {
        match (&mut task.role, result) {
            (Role::Init(slot), None) => Step::Evaluate(self.pop.get(*slot).genotype.clone()),
            (Role::Init(slot), Some(s)) => {
                finish_init(&mut self.pop, *slot, s);
                Step::Done
            }
            (Role::Breed(child), None) => {
                let g = match child.take() {
                    Some(g) => g,
                    None => self.breed(&mut task.rng),
                };
                Step::Evaluate(g)
            }
            (Role::Breed(_), Some(s)) => {
                survive(
                    self.survival,
                    &mut self.pop,
                    &mut self.pool,
                    s,
                    task.id,
                    &mut task.rng,
                    &self.root,
                );
                Step::Done
            }
        }
    }

    fn task_label(&self, task: &GaTask) -> &'static str {
        match task.role {
            Role::Init(_) => "init",
            Role::Breed(_) => "breed",
        }
    }
}
