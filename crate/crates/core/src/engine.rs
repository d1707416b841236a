//! Deterministic discrete-event simulator.
//!
//! `N` simulated workers pull tasks from a FIFO queue. A task is a resumable
//! state machine: each resumption runs instantly at the current simulated time
//! and either requests an evaluation, which occupies its worker for the
//! genotype's evaluation time, or finishes. Nothing else advances the clock.
//!
//! At every instant the simulator first delivers all evaluation completions
//! due at that time (in issue order), then hands queued tasks to idle workers
//! in worker-id order.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::genotype::{Genotype, Individual, Population};
use crate::problems::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// All tasks of a generation must finish before the next generation starts.
    Synchronous,
    /// Every finished task immediately queues its successor.
    Asynchronous,
}

/// What a task asks of the simulator after a resumption.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Evaluate(Genotype),
    Done,
}

/// Read-only view of simulator state handed to tasks.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub now: f64,
    /// Best individual evaluated so far in this run.
    pub elitist: Option<&'a Individual>,
}

/// Source of fitness values and evaluation times.
pub trait Evaluator {
    fn len(&self) -> usize;
    /// Returns `(fitness, evaluation time)`; `g` has the right length.
    fn evaluate(&self, g: &Genotype) -> (f64, f64);
    fn target(&self) -> f64;
}

impl Evaluator for ProblemInstance {
    fn len(&self) -> usize {
        ProblemInstance::len(self)
    }

    fn evaluate(&self, g: &Genotype) -> (f64, f64) {
        self.evaluate_unchecked(g)
    }

    fn target(&self) -> f64 {
        ProblemInstance::target(self)
    }
}

/// An evolutionary algorithm expressed as simulator tasks.
pub trait Algorithm {
    type Task;

    fn mode(&self) -> Mode;

    /// The shared population the termination rules inspect.
    fn population(&self) -> &Population;

    /// Task that initializes population slot `slot`.
    fn init_task(&mut self, slot: usize) -> Self::Task;

    /// Synchronous mode: tasks of the next generation.
    fn generation_tasks(&mut self, ctx: &StepContext<'_>) -> Vec<Self::Task>;

    /// Synchronous mode: called at the barrier once every task of the current
    /// generation (including initialization) has finished.
    fn end_generation(&mut self, _ctx: &StepContext<'_>) {}

    /// Asynchronous mode: task queued when `finished` completes.
    fn successor(&mut self, finished: Self::Task, ctx: &StepContext<'_>) -> Self::Task;

    /// Resumes `task`. `result` carries the completed evaluation requested by
    /// the previous step, or `None` on the first resumption.
    fn step(&mut self, task: &mut Self::Task, result: Option<Individual>, ctx: &StepContext<'_>) -> Step;

    fn task_label(&self, _task: &Self::Task) -> &'static str {
        "task"
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    TargetReached,
    Converged,
    TimeLimit,
    EvaluationLimit,
    Stagnated,
    /// Many consecutive tasks finished without issuing an evaluation.
    Stalled,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::TargetReached
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::TargetReached => "target",
            Outcome::Converged => "converged",
            Outcome::TimeLimit => "time_limit",
            Outcome::EvaluationLimit => "evaluation_limit",
            Outcome::Stagnated => "stagnated",
            Outcome::Stalled => "stalled",
        }
    }
}

/// Stopping rules checked after every completed evaluation and at every
/// generation barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    pub max_time: Option<f64>,
    pub max_evaluations: Option<u64>,
    /// Stop when more than `2e + 10·|P|` evaluations were issued since the
    /// last improvement, `e` being the issued count at that improvement.
    pub stagnation: bool,
}

impl Default for Termination {
    fn default() -> Self {
        Self {
            max_time: None,
            max_evaluations: None,
            stagnation: false,
        }
    }
}

impl Termination {
    /// Applies the stopping rules in order: target, convergence, time cap,
    /// evaluation cap, stagnation.
    pub fn check(&self, stats: &RunStats, population: &Population, target: f64) -> Option<Outcome> {
        if stats.best_fitness >= target {
            return Some(Outcome::TargetReached);
        }
        if population.converged() {
            return Some(Outcome::Converged);
        }
        if matches!(self.max_time, Some(cap) if stats.simulated_time > cap) {
            return Some(Outcome::TimeLimit);
        }
        if matches!(self.max_evaluations, Some(cap) if stats.evaluations_issued >= cap) {
            return Some(Outcome::EvaluationLimit);
        }
        if self.stagnation {
            let e = stats.last_improvement_issued;
            let since = stats.evaluations_issued - e;
            if since > 2 * e + 10 * population.len() as u64 {
                return Some(Outcome::Stagnated);
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    TaskStart,
    EvalIssued,
    EvalCompleted,
    TaskDone,
    /// End of the dispatch phase at an instant.
    Settled,
    Barrier,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TaskStart => "task_start",
            EventKind::EvalIssued => "eval_issued",
            EventKind::EvalCompleted => "eval_completed",
            EventKind::TaskDone => "task_done",
            EventKind::Settled => "settled",
            EventKind::Barrier => "barrier",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub worker: Option<usize>,
    pub kind: EventKind,
    pub task: &'static str,
    pub generation: u64,
    pub evaluations: u64,
    pub best_fitness: f64,
    pub queued: usize,
    pub idle_workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub outcome: Outcome,
    pub evaluations_issued: u64,
    pub evaluations_completed: u64,
    pub simulated_time: f64,
    /// Accumulated idle time per worker.
    pub idle_time: Vec<f64>,
    pub best_fitness: f64,
    /// `(time, fitness)` at every improvement of the best fitness.
    pub best_trace: Vec<(f64, f64)>,
    /// Evaluations issued when the best fitness last improved.
    pub last_improvement_issued: u64,
    pub generations: u64,
    pub tasks_completed: u64,
    pub events: Vec<EventRecord>,
}

impl RunStats {
    fn new(workers: usize) -> Self {
        Self {
            outcome: Outcome::Stalled,
            evaluations_issued: 0,
            evaluations_completed: 0,
            simulated_time: 0.0,
            idle_time: vec![0.0; workers],
            best_fitness: f64::NEG_INFINITY,
            best_trace: Vec::new(),
            last_improvement_issued: 0,
            generations: 0,
            tasks_completed: 0,
            events: Vec::new(),
        }
    }

    pub fn success(&self) -> bool {
        self.outcome.is_success()
    }

    pub fn total_idle_time(&self) -> f64 {
        self.idle_time.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineConfig {
    pub workers: usize,
    pub termination: Termination,
    pub record_events: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Worker<T> {
    task: Option<T>,
    pending: Option<Individual>,
    idle_since: f64,
    evaluations_in_task: u64,
}

/// Simulation of one run of `alg` on `eval`.
pub struct Simulation<'e, A: Algorithm, E: Evaluator> {
    eval: &'e E,
    alg: A,
    config: EngineConfig,
    workers: Vec<Worker<A::Task>>,
    queue: VecDeque<A::Task>,
    // (completion time, issue sequence, worker)
    events: BinaryHeap<Reverse<(Time, u64, usize)>>,
    seq: u64,
    now: f64,
    elitist: Option<Individual>,
    stats: RunStats,
    tasks_without_eval: u64,
}

impl<'e, A: Algorithm, E: Evaluator> Simulation<'e, A, E> {
    pub fn new(alg: A, eval: &'e E, config: EngineConfig) -> Self {
        let n = config.workers.max(1);
        Self {
            eval,
            alg,
            config,
            workers: (0..n)
                .map(|_| Worker {
                    task: None,
                    pending: None,
                    idle_since: 0.0,
                    evaluations_in_task: 0,
                })
                .collect(),
            queue: VecDeque::new(),
            events: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            elitist: None,
            stats: RunStats::new(n),
            tasks_without_eval: 0,
        }
    }

    /// Runs to termination in the algorithm's mode.
    pub fn run(self) -> (RunStats, A) {
        match self.alg.mode() {
            Mode::Synchronous => self.run_synchronous(),
            Mode::Asynchronous => self.run_asynchronous(),
        }
    }

    pub fn run_synchronous(mut self) -> (RunStats, A) {
        let size = self.alg.population().len();
        for slot in 0..size {
            let t = self.alg.init_task(slot);
            self.queue.push_back(t);
        }
        let outcome = loop {
            if let Some(o) = self.drain(Mode::Synchronous) {
                break o;
            }
            let ctx = StepContext {
                now: self.now,
                elitist: self.elitist.as_ref(),
            };
            self.alg.end_generation(&ctx);
            self.stats.generations += 1;
            self.log(None, EventKind::Barrier, "barrier");
            if let Some(o) = self.check() {
                break o;
            }
            if self.tasks_without_eval > self.stall_limit() {
                break Outcome::Stalled;
            }
            let ctx = StepContext {
                now: self.now,
                elitist: self.elitist.as_ref(),
            };
            let tasks = self.alg.generation_tasks(&ctx);
            if tasks.is_empty() {
                break Outcome::Stalled;
            }
            self.queue.extend(tasks);
        };
        self.finish(outcome)
    }

    pub fn run_asynchronous(mut self) -> (RunStats, A) {
        let size = self.alg.population().len();
        for slot in 0..size {
            let t = self.alg.init_task(slot);
            self.queue.push_back(t);
        }
        let outcome = self.drain(Mode::Asynchronous).unwrap_or(Outcome::Stalled);
        self.finish(outcome)
    }

    fn stall_limit(&self) -> u64 {
        1000 * (self.alg.population().len() as u64 + self.workers.len() as u64)
    }

    fn check(&self) -> Option<Outcome> {
        self.config
            .termination
            .check(&self.stats, self.alg.population(), self.eval.target())
    }

    /// Runs until the queue is empty and no evaluation is in flight, or until
    /// a stopping rule fires.
    fn drain(&mut self, mode: Mode) -> Option<Outcome> {
        loop {
            if let Some(o) = self.dispatch(mode) {
                return Some(o);
            }
            let Some(Reverse((Time(t), _, _))) = self.events.peek().copied() else {
                return None;
            };
            if let Some(cap) = self.config.termination.max_time {
                if t > cap {
                    self.now = cap;
                    self.stats.simulated_time = cap;
                    return Some(Outcome::TimeLimit);
                }
            }
            debug_assert!(t >= self.now);
            self.now = t;
            self.stats.simulated_time = t;
            while let Some(Reverse((Time(te), _, w))) = self.events.peek().copied() {
                if te != t {
                    break;
                }
                self.events.pop();
                if let Some(o) = self.complete(w, mode) {
                    return Some(o);
                }
            }
        }
    }

    fn idle_workers(&self) -> usize {
        self.workers.iter().filter(|w| w.task.is_none()).count()
    }

    fn log(&mut self, worker: Option<usize>, kind: EventKind, task: &'static str) {
        if !self.config.record_events {
            return;
        }
        let rec = EventRecord {
            time: self.now,
            worker,
            kind,
            task,
            generation: self.stats.generations,
            evaluations: self.stats.evaluations_completed,
            best_fitness: self.stats.best_fitness,
            queued: self.queue.len(),
            idle_workers: self.idle_workers(),
        };
        self.stats.events.push(rec);
    }

    /// Hands queued tasks to idle workers, lowest worker id first.
    fn dispatch(&mut self, mode: Mode) -> Option<Outcome> {
        for w in 0..self.workers.len() {
            while self.workers[w].task.is_none() {
                let Some(task) = self.queue.pop_front() else {
                    break;
                };
                let worker = &mut self.workers[w];
                self.stats.idle_time[w] += self.now - worker.idle_since;
                worker.evaluations_in_task = 0;
                let label = self.alg.task_label(&task);
                self.workers[w].task = Some(task);
                self.log(Some(w), EventKind::TaskStart, label);
                if let Some(o) = self.resume(w, None, mode) {
                    return Some(o);
                }
            }
        }
        self.log(None, EventKind::Settled, "");
        None
    }

    fn resume(&mut self, w: usize, result: Option<Individual>, mode: Mode) -> Option<Outcome> {
        let mut task = self.workers[w].task.take().expect("worker has a task");
        let ctx = StepContext {
            now: self.now,
            elitist: self.elitist.as_ref(),
        };
        let step = self.alg.step(&mut task, result, &ctx);
        let label = self.alg.task_label(&task);
        match step {
            Step::Evaluate(g) => {
                let (fitness, time) = self.eval.evaluate(&g);
                debug_assert!(time >= 0.0);
                self.stats.evaluations_issued += 1;
                let worker = &mut self.workers[w];
                worker.evaluations_in_task += 1;
                worker.pending = Some(Individual::new(g, fitness, time));
                worker.task = Some(task);
                self.events.push(Reverse((Time(self.now + time), self.seq, w)));
                self.seq += 1;
                self.tasks_without_eval = 0;
                self.log(Some(w), EventKind::EvalIssued, label);
                None
            }
            Step::Done => {
                self.stats.tasks_completed += 1;
                self.workers[w].idle_since = self.now;
                if self.workers[w].evaluations_in_task == 0 {
                    self.tasks_without_eval += 1;
                }
                self.log(Some(w), EventKind::TaskDone, label);
                if mode == Mode::Asynchronous {
                    let ctx = StepContext {
                        now: self.now,
                        elitist: self.elitist.as_ref(),
                    };
                    let next = self.alg.successor(task, &ctx);
                    self.queue.push_back(next);
                    if let Some(o) = self.check() {
                        return Some(o);
                    }
                    if self.tasks_without_eval > self.stall_limit() {
                        return Some(Outcome::Stalled);
                    }
                }
                None
            }
        }
    }

    fn complete(&mut self, w: usize, mode: Mode) -> Option<Outcome> {
        let ind = self.workers[w].pending.take().expect("pending evaluation");
        self.stats.evaluations_completed += 1;
        if ind.fitness > self.stats.best_fitness {
            self.stats.best_fitness = ind.fitness;
            self.stats.best_trace.push((self.now, ind.fitness));
            self.stats.last_improvement_issued = self.stats.evaluations_issued;
        }
        if self.elitist.as_ref().map_or(true, |e| ind.fitness > e.fitness) {
            self.elitist = Some(ind.clone());
        }
        let label = self
            .workers[w]
            .task
            .as_ref()
            .map_or("task", |t| self.alg.task_label(t));
        self.log(Some(w), EventKind::EvalCompleted, label);
        if let Some(o) = self.resume(w, Some(ind), mode) {
            return Some(o);
        }
        self.check()
    }

    fn finish(mut self, outcome: Outcome) -> (RunStats, A) {
        for (w, worker) in self.workers.iter().enumerate() {
            if worker.task.is_none() && self.now > worker.idle_since {
                self.stats.idle_time[w] += self.now - worker.idle_since;
            }
        }
        self.stats.outcome = outcome;
        self.stats.simulated_time = self.now;
        (self.stats, self.alg)
    }

    pub fn elitist(&self) -> Option<&Individual> {
        self.elitist.as_ref()
    }
}

/// Wraps an algorithm and calls `observer` after every task step, with the
/// algorithm's state and the step's context.
pub struct Observed<A, F> {
    pub inner: A,
    observer: F,
}

impl<A, F> Observed<A, F>
where
    A: Algorithm,
    F: FnMut(&A, &StepContext<'_>),
{
    pub fn new(inner: A, observer: F) -> Self {
        Self { inner, observer }
    }
}

impl<A, F> Algorithm for Observed<A, F>
where
    A: Algorithm,
    F: FnMut(&A, &StepContext<'_>),
{
    type Task = A::Task;

    fn mode(&self) -> Mode {
        self.inner.mode()
    }

    fn population(&self) -> &Population {
        self.inner.population()
    }

    fn init_task(&mut self, slot: usize) -> A::Task {
        self.inner.init_task(slot)
    }

    fn generation_tasks(&mut self, ctx: &StepContext<'_>) -> Vec<A::Task> {
        self.inner.generation_tasks(ctx)
    }

    fn end_generation(&mut self, ctx: &StepContext<'_>) {
        self.inner.end_generation(ctx);
        (self.observer)(&self.inner, ctx);
    }

    fn successor(&mut self, finished: A::Task, ctx: &StepContext<'_>) -> A::Task {
        self.inner.successor(finished, ctx)
    }

    fn step(&mut self, task: &mut A::Task, result: Option<Individual>, ctx: &StepContext<'_>) -> Step {
        let step = self.inner.step(task, result, ctx);
        (self.observer)(&self.inner, ctx);
        step
    }

    fn task_label(&self, task: &A::Task) -> &'static str {
        self.inner.task_label(task)
    }
}

/// Event-log audits. Each returns a description of the first violation.
pub mod audit {
    use alloc::format;
    use alloc::string::String;

    use super::{EventKind, EventRecord};

    /// No evaluation of generation `g + 1` is issued before every evaluation
    /// issued in generation `g` has completed.
    pub fn barrier_ordering(events: &[EventRecord]) -> Result<(), String> {
        let mut in_flight = 0i64;
        let mut generation = 0;
        for (i, e) in events.iter().enumerate() {
            if e.generation != generation {
                if in_flight != 0 {
                    return Err(format!("event {i}: generation {} starts with {in_flight} evaluations in flight", e.generation));
                }
                generation = e.generation;
            }
            match e.kind {
                EventKind::EvalIssued => in_flight += 1,
                EventKind::EvalCompleted => in_flight -= 1,
                EventKind::Barrier if in_flight != 0 => {
                    return Err(format!("event {i}: barrier with {in_flight} evaluations in flight"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Whenever the dispatcher settles, either the queue is empty or no worker
    /// is idle.
    pub fn work_conservation(events: &[EventRecord]) -> Result<(), String> {
        for (i, e) in events.iter().enumerate() {
            if e.kind == EventKind::Settled && e.queued > 0 && e.idle_workers > 0 {
                return Err(format!(
                    "event {i} at t={}: {} queued tasks while {} workers idle",
                    e.time, e.queued, e.idle_workers
                ));
            }
        }
        Ok(())
    }

    /// Simulated time never decreases along the log.
    pub fn clock_monotone(events: &[EventRecord]) -> Result<(), String> {
        for (i, w) in events.windows(2).enumerate() {
            if w[1].time < w[0].time {
                return Err(format!("event {}: time goes back from {} to {}", i + 1, w[0].time, w[1].time));
            }
        }
        Ok(())
    }

    /// The best fitness recorded in the log never decreases.
    pub fn best_fitness_monotone(events: &[EventRecord]) -> Result<(), String> {
        for (i, w) in events.windows(2).enumerate() {
            if w[1].best_fitness < w[0].best_fitness {
                return Err(format!("event {}: best fitness drops", i + 1));
            }
        }
        Ok(())
    }
}
