//! Extended Compact GA: a marginal product model is learned from a
//! tournament-selected copy of the population and sampled to create offspring.
//! The model is relearned after it has been sampled |P| times.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::engine::{Algorithm, Mode, Step, StepContext};
use crate::error::{invalid, Result};
use crate::ga::{finish_init, initial_population, streams, survive, tournament_select, OffspringPool, Survival, TOURNAMENT_SIZE};
use crate::genotype::{Genotype, Individual, Population};
use crate::rng::RandomSource;

/// Largest subset the greedy merge may create.
pub const MAX_SUBSET: usize = 12;

fn pattern_index(g: &Genotype, subset: &[usize]) -> usize {
    subset.iter().fold(0, |acc, &i| (acc << 1) | g.get(i) as usize)
}

fn counts(selected: &[Genotype], subset: &[usize]) -> Vec<u32> {
    let mut c = vec![0u32; 1 << subset.len()];
    for g in selected {
        c[pattern_index(g, subset)] += 1;
    }
    c
}

/// Base-2 entropy of the sub-genotype distribution of `subset`.
fn subset_entropy(selected: &[Genotype], subset: &[usize]) -> f64 {
    let n = selected.len() as f64;
    counts(selected, subset)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * libm::log2(p)
        })
        .sum()
}

fn model_cost(n: usize, size: usize) -> f64 {
    libm::log2(n as f64 + 1.0) * ((1u64 << size) - 1) as f64
}

/// Combined complexity of a partition: model complexity plus compressed
/// population complexity,
/// `log2(N+1)·Σ(2^|S| − 1) + N·Σ H(S)` with `N = |selected|`.
pub fn combined_complexity(selected: &[Genotype], partition: &[Vec<usize>]) -> f64 {
    let n = selected.len();
    partition
        .iter()
        .map(|s| model_cost(n, s.len()) + n as f64 * subset_entropy(selected, s))
        .sum()
}

/// Greedy MDL search: start univariate and repeatedly merge the pair of
/// subsets with the largest decrease of [`combined_complexity`] until no
/// merge decreases it. Ties go to the lowest index pair.
pub fn learn_partition(selected: &[Genotype], len: usize, max_subset: usize) -> Vec<Vec<usize>> {
    let n = selected.len();
    let mut parts: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
    let mut cost: Vec<f64> = parts
        .iter()
        .map(|s| model_cost(n, s.len()) + n as f64 * subset_entropy(selected, s))
        .collect();

    let merged_cost = |a: &[usize], b: &[usize]| -> Option<f64> {
        if a.len() + b.len() > max_subset {
            return None;
        }
        let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
        u.sort_unstable();
        Some(model_cost(n, u.len()) + n as f64 * subset_entropy(selected, &u))
    };

    // delta[i][j] (i < j): cost change of merging parts i and j.
    let mut delta: Vec<Vec<Option<f64>>> = (0..parts.len())
        .map(|i| {
            (0..parts.len())
                .map(|j| {
                    (j > i)
                        .then(|| merged_cost(&parts[i], &parts[j]).map(|m| m - cost[i] - cost[j]))
                        .flatten()
                })
                .collect()
        })
        .collect();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if let Some(d) = delta[i][j] {
                    if d < 0.0 && best.map_or(true, |(_, _, bd)| d < bd) {
                        best = Some((i, j, d));
                    }
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let b = parts.remove(j);
        cost.remove(j);
        delta.remove(j);
        for row in delta.iter_mut() {
            row.remove(j);
        }
        parts[i].extend(b);
        parts[i].sort_unstable();
        cost[i] = model_cost(n, parts[i].len()) + n as f64 * subset_entropy(selected, &parts[i]);
        for other in 0..parts.len() {
            if other == i {
                continue;
            }
            let (lo, hi) = if other < i { (other, i) } else { (i, other) };
            delta[lo][hi] = merged_cost(&parts[lo], &parts[hi]).map(|m| m - cost[lo] - cost[hi]);
        }
    }
    parts
}

/// Disjoint partition of the variables with per-subset frequency tables.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalProductModel {
    partition: Vec<Vec<usize>>,
    tables: Vec<Vec<u32>>,
    selected: usize,
    len: usize,
    uses_left: usize,
}

impl MarginalProductModel {
    /// Frequency tables of `selected` over a given partition.
    pub fn from_selected(selected: &[Genotype], partition: Vec<Vec<usize>>) -> Result<Self> {
        let Some(len) = selected.first().map(Genotype::len) else {
            return Err(invalid("cannot build a model from an empty selection"));
        };
        let mut seen = vec![false; len];
        for &i in partition.iter().flatten() {
            if i >= len || seen[i] {
                return Err(invalid("model partition is not a disjoint cover"));
            }
            seen[i] = true;
        }
        if seen.contains(&false) {
            return Err(invalid("model partition leaves variables uncovered"));
        }
        let tables = partition.iter().map(|s| counts(selected, s)).collect();
        Ok(Self {
            partition,
            tables,
            selected: selected.len(),
            len,
            uses_left: selected.len(),
        })
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Count of each sub-genotype of subset `i`, indexed with the subset's
    /// first variable as most significant bit.
    pub fn table(&self, i: usize) -> &[u32] {
        &self.tables[i]
    }

    pub fn uses_left(&self) -> usize {
        self.uses_left
    }

    /// Draws each subset's sub-genotype in proportion to its frequency.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Genotype> {
        if self.uses_left == 0 {
            return Err(invalid("model exhausted; relearn before sampling"));
        }
        self.uses_left -= 1;
        let mut g = Genotype::zeros(self.len);
        for (subset, table) in self.partition.iter().zip(&self.tables) {
            let mut r = rng.gen_range(0..self.selected as u32);
            let idx = table
                .iter()
                .position(|&c| {
                    if r < c {
                        true
                    } else {
                        r -= c;
                        false
                    }
                })
                .expect("table sums to the selection size");
            let k = subset.len();
            for (j, &var) in subset.iter().enumerate() {
                g.set(var, ((idx >> (k - 1 - j)) & 1) as u8);
            }
        }
        Ok(g)
    }
}

/// Tournament-selects |P| solutions (size 4) and fits a model to them.
pub fn learn_mpm<R: Rng + ?Sized>(pop: &Population, rng: &mut R) -> Result<MarginalProductModel> {
    learn_mpm_capped(pop, MAX_SUBSET, rng)
}

pub fn learn_mpm_capped<R: Rng + ?Sized>(
    pop: &Population,
    max_subset: usize,
    rng: &mut R,
) -> Result<MarginalProductModel> {
    if pop.len() < TOURNAMENT_SIZE {
        return Err(invalid("model learning needs at least 4 solutions"));
    }
    let selected: Vec<Genotype> = tournament_select(pop.members(), pop.len(), TOURNAMENT_SIZE, rng)
        .into_iter()
        .map(|i| i.genotype)
        .collect();
    let len = selected[0].len();
    let partition = learn_partition(&selected, len, max_subset.clamp(1, MAX_SUBSET.min(len.max(1))));
    MarginalProductModel::from_selected(&selected, partition)
}

#[derive(Debug, Clone)]
pub struct EcgaTask {
    id: u64,
    rng: RandomSource,
    role: Role,
}

#[derive(Debug, Clone)]
enum Role {
    Init(usize),
    Sample(Option<Genotype>),
}

#[derive(Debug, Clone)]
pub struct Ecga {
    mode: Mode,
    survival: Survival,
    pop: Population,
    pool: OffspringPool,
    model: Option<MarginalProductModel>,
    root: RandomSource,
    next_id: u64,
    samples: u64,
    history: Vec<Vec<Vec<usize>>>,
}

impl Ecga {
    pub fn new(mode: Mode, survival: Survival, population_size: usize, len: usize, seed: u64) -> Self {
        let root = RandomSource::new(seed);
        Self {
            mode,
            survival,
            pop: initial_population(population_size, len, &root),
            pool: OffspringPool::default(),
            model: None,
            root,
            next_id: 0,
            samples: 0,
            history: Vec::new(),
        }
    }

    /// Number of models learned so far.
    pub fn learn_count(&self) -> usize {
        self.history.len()
    }

    /// Offspring sampled so far.
    pub fn sample_count(&self) -> u64 {
        self.samples
    }

    /// Partition of every learned model, in learning order.
    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.history
    }

    pub fn model(&self) -> Option<&MarginalProductModel> {
        self.model.as_ref()
    }

    fn task(&mut self, role: Role) -> EcgaTask {
        let id = self.next_id;
        self.next_id += 1;
        EcgaTask {
            id,
            rng: self.root.fork(streams::TASK, id),
            role,
        }
    }

    fn sample(&mut self, rng: &mut RandomSource) -> Genotype {
        if self.model.as_ref().map_or(true, |m| m.uses_left() == 0) {
            let mut learn_rng = self.root.fork(streams::LEARN, self.history.len() as u64);
            let model = learn_mpm(&self.pop, &mut learn_rng).expect("population size checked at construction");
            self.history.push(model.partition().to_vec());
            self.model = Some(model);
        }
        self.samples += 1;
        self.model
            .as_mut()
            .expect("model learned above")
            .sample(rng)
            .expect("model has uses left")
    }
}

impl Algorithm for Ecga {
    type Task = EcgaTask;

    fn mode(&self) -> Mode {
        self.mode
    }

    fn population(&self) -> &Population {
        &self.pop
    }

    fn init_task(&mut self, slot: usize) -> EcgaTask {
        self.task(Role::Init(slot))
    }

    fn generation_tasks(&mut self, _ctx: &StepContext<'_>) -> Vec<EcgaTask> {
        (0..self.pop.len())
            .map(|_| {
                let mut t = self.task(Role::Sample(None));
                let g = self.sample(&mut t.rng);
                t.role = Role::Sample(Some(g));
                t
            })
            .collect()
    }

    fn successor(&mut self, _finished: EcgaTask, _ctx: &StepContext<'_>) -> EcgaTask {
        self.task(Role::Sample(None))
    }

    fn step(&mut self, task: &mut EcgaTask, result: Option<Individual>, _ctx: &StepContext<'_>) -> Step {
        match (&mut task.role, result) {
            (Role::Init(slot), None) => Step::Evaluate(self.pop.get(*slot).genotype.clone()),
            (Role::Init(slot), Some(s)) => {
                finish_init(&mut self.pop, *slot, s);
                Step::Done
            }
            (Role::Sample(pre), None) => {
                let g = match pre.take() {
                    Some(g) => g,
                    None => self.sample(&mut task.rng),
                };
                Step::Evaluate(g)
            }
            (Role::Sample(_), Some(s)) => {
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

    fn task_label(&self, task: &EcgaTask) -> &'static str {
        match task.role {
            Role::Init(_) => "init",
            Role::Sample(_) => "sample",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn g(s: &str) -> Genotype {
        s.parse().unwrap()
    }

    #[test]
    fn worked_example_samples() {
        let sel = [g("0011"), g("1100")];
        let mut m = MarginalProductModel::from_selected(&sel, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut rng = RandomSource::new(1);
        let mut seen = alloc::collections::BTreeMap::new();
        let draws = 8000;
        for _ in 0..draws {
            m.uses_left = 1;
            *seen.entry(m.sample(&mut rng).unwrap().to_string()).or_insert(0u32) += 1;
        }
        let keys: Vec<_> = seen.keys().cloned().collect();
        assert_eq!(keys, ["0000", "0011", "1100", "1111"]);
        for &c in seen.values() {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.02);
        }
    }

    #[test]
    fn single_member_selection_reproduces_it() {
        let sel = [g("10110")];
        let mut m = MarginalProductModel::from_selected(&sel, vec![vec![0, 2], vec![1], vec![3, 4]]).unwrap();
        let mut rng = RandomSource::new(2);
        assert_eq!(m.sample(&mut rng).unwrap(), sel[0]);
        assert!(m.sample(&mut rng).is_err());
    }

    #[test]
    fn duplicated_pair_is_merged() {
        // x0 = x1, x2 balanced independently of them; 16 members.
        let mut sel = Vec::new();
        for i in 0..16u32 {
            let a = (i & 1) as u8;
            let c = ((i >> 1) & 1) as u8;
            sel.push(Genotype::new(vec![a, a, c]).unwrap());
        }
        let uni = vec![vec![0], vec![1], vec![2]];
        let pair = vec![vec![0, 1], vec![2]];
        let all = vec![vec![0, 1, 2]];
        let l17 = libm::log2(17.0);
        // Univariate: 3 one-bit tables, each with entropy 1.
        assert!((combined_complexity(&sel, &uni) - (3.0 * l17 + 48.0)).abs() < 1e-12);
        // {0,1} has patterns 00/11 at 1/2 each: entropy 1 with 3 free parameters.
        assert!((combined_complexity(&sel, &pair) - (4.0 * l17 + 32.0)).abs() < 1e-12);
        // {0,1,2} has four equiprobable patterns: entropy 2 with 7 parameters.
        assert!((combined_complexity(&sel, &all) - (7.0 * l17 + 32.0)).abs() < 1e-12);
        assert_eq!(learn_partition(&sel, 3, MAX_SUBSET), pair);
    }

    #[test]
    fn random_population_stays_univariate() {
        let mut rng = RandomSource::new(3);
        let sel: Vec<Genotype> = (0..2000).map(|_| Genotype::random(8, &mut rng)).collect();
        let uni: Vec<Vec<usize>> = (0..8).map(|i| vec![i]).collect();
        assert_eq!(learn_partition(&sel, 8, MAX_SUBSET), uni);
    }

    #[test]
    fn converged_population_stays_univariate() {
        let sel = vec![g("01101"); 32];
        let uni: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();
        assert_eq!(learn_partition(&sel, 5, MAX_SUBSET), uni);
    }

    #[test]
    fn merge_cap_is_respected() {
        // Four perfectly correlated bits but a cap of 2.
        let sel: Vec<Genotype> = (0..64).map(|i| if i % 2 == 0 { g("1111") } else { g("0000") }).collect();
        let parts = learn_partition(&sel, 4, 2);
        assert!(parts.iter().all(|p| p.len() <= 2));
        assert_eq!(learn_partition(&sel, 4, MAX_SUBSET), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn learned_model_is_valid_cover() {
        let mut rng = RandomSource::new(4);
        let members: Vec<Individual> = (0..40)
            .map(|i| Individual::new(Genotype::random(10, &mut rng), (i % 7) as f64, 1.0))
            .collect();
        let m = learn_mpm(&members.into(), &mut rng).unwrap();
        let mut vars: Vec<usize> = m.partition().concat();
        vars.sort_unstable();
        assert_eq!(vars, (0..10).collect::<Vec<_>>());
        for i in 0..m.partition().len() {
            assert_eq!(m.table(i).iter().sum::<u32>(), 40);
        }
        assert_eq!(m.uses_left(), 40);
    }

    #[test]
    fn learning_needs_four() {
        let mut rng = RandomSource::new(0);
        let p: Population = vec![Individual::new(g("01"), 0.0, 1.0); 3].into();
        assert!(learn_mpm(&p, &mut rng).is_err());
    }
}
