//! GOMEA with a linkage-tree family of subsets, gene-pool optimal mixing
//! (GOM) and forced improvements (FI), in three parallel variants.
//!
//! - `Sync`: GOM is applied to an offspring copy of every member; all
//!   applications of a generation draw donors from the frozen population and
//!   the offspring replace the population at the barrier.
//! - `AsyncEnd` (a/e): every application snapshots the population when it
//!   starts and writes its result back when it ends.
//! - `AsyncIntermediate` (a/i): like a/e, but every accepted change is also
//!   written back immediately.
//!
//! A family of subsets is relearned after |P| applications. Steps whose donor
//! carries the same values as the solution do not change the genotype and are
//! not evaluated, unless `charge_noop_evals` is set.

pub mod linkage;

use alloc::rc::Rc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

pub use linkage::{learn_linkage_tree, linkage_tree, nmi_matrix};

use crate::engine::{Algorithm, Mode, Step, StepContext};
use crate::ga::{finish_init, initial_population, streams};
use crate::genotype::{Genotype, Individual, Population};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GomeaVariant {
    Sync,
    AsyncEnd,
    AsyncIntermediate,
}

impl GomeaVariant {
    pub fn mode(self) -> Mode {
        match self {
            GomeaVariant::Sync => Mode::Synchronous,
            _ => Mode::Asynchronous,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GomeaVariant::Sync => "sync",
            GomeaVariant::AsyncEnd => "ae",
            GomeaVariant::AsyncIntermediate => "ai",
        }
    }
}

/// Non-improvement stretch after which FI is forced: `1 + ⌊log2 |P|⌋`.
pub fn stretch_threshold(population_size: usize) -> u32 {
    1 + population_size.max(1).ilog2()
}

/// Fitness of the working solution after every step of one GOM(+FI)
/// application, starting with its initial fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct GomTrace {
    pub slot: usize,
    pub fitness: Vec<f64>,
    pub forced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Gom,
    Forced,
}

#[derive(Debug, Clone)]
struct Mixing {
    s: Individual,
    initial_fitness: f64,
    order: Vec<usize>,
    pos: usize,
    donors: Rc<Vec<Genotype>>,
    phase: Phase,
    changed: bool,
    forced: bool,
    settled: bool,
    fi_donor: Option<Individual>,
    fi_reference: f64,
    backup: Option<Genotype>,
    trace: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Role {
    Init,
    Mix(Option<Mixing>),
}

#[derive(Debug, Clone)]
pub struct GomeaTask {
    slot: usize,
    rng: RandomSource,
    role: Role,
}

#[derive(Debug, Clone)]
pub struct Gomea {
    variant: GomeaVariant,
    pop: Population,
    offspring: Option<Vec<Individual>>,
    generation_donors: Option<Rc<Vec<Genotype>>>,
    generation_elitist: Option<Individual>,
    fos: Vec<Vec<usize>>,
    uses_left: usize,
    learns: usize,
    history: Option<Vec<Vec<Vec<usize>>>>,
    stretch: Vec<u32>,
    root: RandomSource,
    next_id: u64,
    charge_noop_evals: bool,
    traces: Option<Vec<GomTrace>>,
}

impl Gomea {
    pub fn new(variant: GomeaVariant, population_size: usize, len: usize, seed: u64) -> Self {
        let root = RandomSource::new(seed);
        Self {
            variant,
            pop: initial_population(population_size, len, &root),
            offspring: None,
            generation_donors: None,
            generation_elitist: None,
            fos: Vec::new(),
            uses_left: 0,
            learns: 0,
            history: None,
            stretch: alloc::vec![0; population_size],
            root,
            next_id: 0,
            charge_noop_evals: false,
            traces: None,
        }
    }

    /// Evaluate every GOM/FI step, including ones that leave the genotype
    /// unchanged.
    pub fn with_charge_noop_evals(mut self, charge: bool) -> Self {
        self.charge_noop_evals = charge;
        self
    }

    /// Record a [`GomTrace`] for every application.
    pub fn with_traces(mut self) -> Self {
        self.traces = Some(Vec::new());
        self
    }

    pub fn traces(&self) -> &[GomTrace] {
        self.traces.as_deref().unwrap_or(&[])
    }

    pub fn fos(&self) -> &[Vec<usize>] {
        &self.fos
    }

    pub fn learn_count(&self) -> usize {
        self.learns
    }

    /// Keep the family of subsets of every learned linkage tree.
    pub fn with_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    /// Recorded families of subsets, in learning order.
    pub fn history(&self) -> &[Vec<Vec<usize>>] {
        self.history.as_deref().unwrap_or(&[])
    }

    pub fn stretch(&self) -> &[u32] {
        &self.stretch
    }

    fn task(&mut self, slot: usize, role: Role) -> GomeaTask {
        let id = self.next_id;
        self.next_id += 1;
        GomeaTask {
            slot,
            rng: self.root.fork(streams::TASK, id),
            role,
        }
    }

    fn donors_now(&self) -> Rc<Vec<Genotype>> {
        Rc::new(self.pop.iter().map(|m| m.genotype.clone()).collect())
    }

    fn begin(&mut self, slot: usize, rng: &mut RandomSource) -> Mixing {
        if self.uses_left == 0 {
            self.fos = learn_linkage_tree(&self.pop);
            self.learns += 1;
            if let Some(h) = self.history.as_mut() {
                h.push(self.fos.clone());
            }
            self.uses_left = self.pop.len();
        }
        self.uses_left -= 1;
        let (s, donors) = match self.variant {
            GomeaVariant::Sync => (
                self.offspring.as_ref().expect("generation started")[slot].clone(),
                self.generation_donors.clone().expect("generation started"),
            ),
            _ => (self.pop.get(slot).clone(), self.donors_now()),
        };
        let mut order: Vec<usize> = (0..self.fos.len()).collect();
        order.shuffle(rng);
        Mixing {
            initial_fitness: s.fitness,
            trace: alloc::vec![s.fitness],
            s,
            order,
            pos: 0,
            donors,
            phase: Phase::Gom,
            changed: false,
            forced: false,
            settled: false,
            fi_donor: None,
            fi_reference: 0.0,
            backup: None,
        }
    }

    /// Moves to the next step that needs an evaluation, or finishes.
    fn advance(&mut self, slot: usize, m: &mut Mixing, rng: &mut RandomSource, ctx: &StepContext<'_>) -> Step {
        loop {
            if m.settled {
                self.finish(slot, m);
                return Step::Done;
            }
            if m.pos == m.order.len() {
                match m.phase {
                    Phase::Gom => {
                        if !self.start_forced(slot, m, rng, ctx) {
                            self.finish(slot, m);
                            return Step::Done;
                        }
                        continue;
                    }
                    Phase::Forced => {
                        // No FOS element improved on the solution: take the elitist.
                        m.s = m.fi_donor.clone().expect("FI donor set");
                        m.trace.push(m.s.fitness);
                        self.finish(slot, m);
                        return Step::Done;
                    }
                }
            }
            let subset = &self.fos[m.order[m.pos]];
            let changes = match m.phase {
                Phase::Gom => {
                    let d = rng.gen_range(0..m.donors.len());
                    let donor = &m.donors[d];
                    if m.s.genotype.differs_at(donor, subset) {
                        m.backup = Some(m.s.genotype.clone());
                        m.s.genotype.copy_positions(donor, subset);
                        true
                    } else {
                        false
                    }
                }
                Phase::Forced => {
                    let donor = &m.fi_donor.as_ref().expect("FI donor set").genotype;
                    if m.s.genotype.differs_at(donor, subset) {
                        m.backup = Some(m.s.genotype.clone());
                        m.s.genotype.copy_positions(donor, subset);
                        true
                    } else {
                        false
                    }
                }
            };
            if changes || self.charge_noop_evals {
                if !changes {
                    m.backup = Some(m.s.genotype.clone());
                }
                return Step::Evaluate(m.s.genotype.clone());
            }
            m.pos += 1;
        }
    }

    fn start_forced(&mut self, slot: usize, m: &mut Mixing, rng: &mut RandomSource, ctx: &StepContext<'_>) -> bool {
        let stretch = if m.s.fitness > m.initial_fitness {
            0
        } else {
            self.stretch[slot] + 1
        };
        if m.changed && stretch < stretch_threshold(self.pop.len()) {
            return false;
        }
        let elitist = match self.variant {
            GomeaVariant::Sync => self.generation_elitist.clone(),
            _ => ctx.elitist.cloned(),
        };
        let Some(elitist) = elitist else {
            return false;
        };
        m.fi_donor = Some(elitist);
        m.fi_reference = m.s.fitness;
        m.forced = true;
        m.phase = Phase::Forced;
        m.order.shuffle(rng);
        m.pos = 0;
        true
    }

    fn receive(&mut self, slot: usize, m: &mut Mixing, result: Individual) {
        let backup = m.backup.take().expect("step was issued");
        let accept = match m.phase {
            Phase::Gom => result.fitness >= m.s.fitness,
            Phase::Forced => result.fitness > m.fi_reference,
        };
        if accept {
            if result.genotype != backup {
                m.changed = true;
            }
            m.s = result;
            if self.variant == GomeaVariant::AsyncIntermediate {
                self.pop.set(slot, m.s.clone());
            }
        } else {
            m.s.genotype = backup;
        }
        m.trace.push(m.s.fitness);
        if m.phase == Phase::Forced && accept {
            m.settled = true;
        } else {
            m.pos += 1;
        }
    }

    fn finish(&mut self, slot: usize, m: &mut Mixing) {
        self.stretch[slot] = if m.s.fitness > m.initial_fitness {
            0
        } else {
            self.stretch[slot] + 1
        };
        match self.variant {
            GomeaVariant::Sync => {
                self.offspring.as_mut().expect("generation started")[slot] = m.s.clone();
            }
            _ => self.pop.set(slot, m.s.clone()),
        }
        if let Some(traces) = self.traces.as_mut() {
            traces.push(GomTrace {
                slot,
                fitness: core::mem::take(&mut m.trace),
                forced: m.forced,
            });
        }
    }
}

impl Algorithm for Gomea {
    type Task = GomeaTask;

    fn mode(&self) -> Mode {
        self.variant.mode()
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn init_task(&mut self, slot: usize) -> GomeaTask {
        self.task(slot, Role::Init)
    }

    fn generation_tasks(&mut self, _ctx: &StepContext<'_>) -> Vec<GomeaTask> {
        self.offspring = Some(self.pop.members().to_vec());
        self.generation_donors = Some(self.donors_now());
        // Scanning slots in order keeps the forced-improvement donor
        // independent of the order in which evaluations completed.
        for m in self.pop.iter() {
            if self.generation_elitist.as_ref().map_or(true, |e| m.fitness > e.fitness) {
                self.generation_elitist = Some(m.clone());
            }
        }
        (0..self.pop.len())
            .map(|slot| self.task(slot, Role::Mix(None)))
            .collect()
    }

    fn end_generation(&mut self, _ctx: &StepContext<'_>) {
        if let Some(offspring) = self.offspring.take() {
            self.pop.replace_all(offspring);
        }
        self.generation_donors = None;
    }

    fn successor(&mut self, finished: GomeaTask, _ctx: &StepContext<'_>) -> GomeaTask {
        self.task(finished.slot, Role::Mix(None))
    }

    fn step(&mut self, task: &mut GomeaTask, result: Option<Individual>, ctx: &StepContext<'_>) -> Step {
        let slot = task.slot;
        match (&mut task.role, result) {
            (Role::Init, None) => Step::Evaluate(self.pop.get(slot).genotype.clone()),
            (Role::Init, Some(s)) => {
                finish_init(&mut self.pop, slot, s);
                Step::Done
            }
            (Role::Mix(state), result) => {
                let mut m = match state.take() {
                    Some(m) => m,
                    None => self.begin(slot, &mut task.rng),
                };
                if let Some(r) = result {
                    self.receive(slot, &mut m, r);
                }
                let step = self.advance(slot, &mut m, &mut task.rng, ctx);
                if step != Step::Done {
                    *state = Some(m);
                }
                step
            }
        }
    }

    fn task_label(&self, task: &GomeaTask) -> &'static str {
        match task.role {
            Role::Init => "init",
            Role::Mix(_) => "gom",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::TimeRatio;
    use crate::problems::ProblemInstance;
    use alloc::string::ToString;
    use alloc::vec;

    fn ind(p: &ProblemInstance, bits: &str) -> Individual {
        let g: Genotype = bits.parse().unwrap();
        let (f, t) = p.evaluate(&g).unwrap();
        Individual::new(g, f, t)
    }

    fn setup(p: &ProblemInstance, members: &[&str], fos: Vec<Vec<usize>>) -> Gomea {
        let mut g = Gomea::new(GomeaVariant::AsyncEnd, members.len(), p.len(), 1);
        g.pop = members.iter().map(|m| ind(p, m)).collect::<Vec<_>>().into();
        g.fos = fos;
        g.uses_left = 100;
        g
    }

    // Runs one application on `slot`; returns the number of evaluations.
    fn drive(g: &mut Gomea, slot: usize, p: &ProblemInstance, elitist: &Individual) -> usize {
        let mut task = g.task(slot, Role::Mix(None));
        let ctx = StepContext {
            now: 0.0,
            elitist: Some(elitist),
        };
        let mut result = None;
        let mut evals = 0;
        loop {
            match g.step(&mut task, result.take(), &ctx) {
                Step::Evaluate(x) => {
                    evals += 1;
                    let (f, t) = p.evaluate(&x).unwrap();
                    result = Some(Individual::new(x, f, t));
                }
                Step::Done => return evals,
            }
        }
    }

    fn one() -> TimeRatio {
        TimeRatio::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn threshold() {
        assert_eq!(stretch_threshold(16), 5);
        assert_eq!(stretch_threshold(17), 5);
        assert_eq!(stretch_threshold(32), 6);
    }

    #[test]
    fn converged_snapshot_goes_to_elitist_for_free() {
        let p = ProblemInstance::trap(5, 5, one()).unwrap();
        let mut g = setup(&p, &["10100"; 4], vec![vec![0], vec![1], vec![0, 1]]);
        let elitist = g.pop.get(0).clone();
        assert_eq!(drive(&mut g, 0, &p, &elitist), 0);
        assert_eq!(g.pop.get(0), &elitist);
    }

    #[test]
    fn block_donation_is_accepted() {
        let p = ProblemInstance::trap(10, 5, one()).unwrap();
        let mut g = setup(&p, &["0000000000", "1111100000"], vec![vec![0, 1, 2, 3, 4]]);
        g.stretch = vec![0, 0];
        let elitist = g.pop.get(1).clone();
        let mut evals = 0;
        // Donors are drawn at random; repeat until the better member donated.
        for _ in 0..20 {
            evals += drive(&mut g, 0, &p, &elitist);
            if g.pop.get(0).fitness == 9.0 {
                break;
            }
        }
        assert_eq!(g.pop.get(0).fitness, 9.0);
        assert_eq!(g.pop.get(0).genotype.to_string(), "1111100000");
        assert!(evals >= 1);
    }

    #[test]
    fn equal_fitness_is_accepted() {
        let p = ProblemInstance::trap(5, 5, one()).unwrap();
        let mut g = setup(&p, &["10000", "01000"], vec![vec![0, 1]]);
        // Forced improvements from this elitist never move the solution.
        let elitist = g.pop.get(0).clone();
        let before = g.pop.get(0).fitness;
        for _ in 0..20 {
            g.stretch = vec![0, 0];
            drive(&mut g, 0, &p, &elitist);
            if g.pop.get(0).genotype.to_string() == "01000" {
                break;
            }
        }
        assert_eq!(g.pop.get(0).genotype.to_string(), "01000");
        assert_eq!(g.pop.get(0).fitness, before);
    }

    #[test]
    fn forced_improvement_stops_at_first_success() {
        let p = ProblemInstance::trap(2, 2, one()).unwrap();
        let mut g = setup(&p, &["10"; 4], vec![vec![0], vec![1]]);
        let elitist = ind(&p, "11");
        g.traces = Some(Vec::new());
        assert_eq!(drive(&mut g, 0, &p, &elitist), 1);
        assert_eq!(g.pop.get(0).genotype.to_string(), "11");
        let trace = &g.traces()[0];
        assert!(trace.forced);
        assert_eq!(trace.fitness, vec![0.0, 2.0]);
        assert_eq!(g.stretch()[0], 0);
    }

    #[test]
    fn failed_forced_improvement_copies_elitist() {
        let p = ProblemInstance::trap(2, 2, one()).unwrap();
        let mut g = setup(&p, &["00"; 4], vec![vec![0], vec![1]]);
        let elitist = ind(&p, "11");
        // Both single-bit moves towards the elitist lower the trap value.
        assert_eq!(drive(&mut g, 0, &p, &elitist), 2);
        assert_eq!(g.pop.get(0), &elitist);
    }

    // First accepted step of an application that has a further step pending.
    fn first_acceptance(variant: GomeaVariant) -> (Gomea, Genotype) {
        let p = ProblemInstance::trap(10, 5, one()).unwrap();
        let ctx = StepContext {
            now: 0.0,
            elitist: None,
        };
        for seed in 0..200 {
            let mut g = setup(&p, &["0000000000", "1111111111"], vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
            g.variant = variant;
            g.root = RandomSource::new(seed);
            let mut task = g.task(0, Role::Mix(None));
            let Step::Evaluate(x) = g.step(&mut task, None, &ctx) else {
                continue;
            };
            let (f, t) = p.evaluate(&x).unwrap();
            if g.step(&mut task, Some(Individual::new(x.clone(), f, t)), &ctx) != Step::Done {
                return (g, x);
            }
        }
        panic!("no seed produced two changing steps");
    }

    #[test]
    fn intermediate_acceptance_visibility() {
        let (ae, _) = first_acceptance(GomeaVariant::AsyncEnd);
        assert_eq!(ae.pop.get(0).genotype.to_string(), "0000000000");
        let (ai, x) = first_acceptance(GomeaVariant::AsyncIntermediate);
        assert_eq!(ai.pop.get(0).genotype, x);
        assert_eq!(ai.pop.get(0).fitness, 9.0);
    }
}
