use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::genotype::{Individual, Population};

pub const TOURNAMENT_SIZE: usize = 4;

/// Survival selection applied to each evaluated offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Survival {
    /// Replace a uniformly chosen member if it is strictly worse.
    SteadyState,
    /// Collect offspring until |O| = |P|, then run a P+O tournament.
    GenerationalPool,
}

impl Survival {
    pub fn as_str(self) -> &'static str {
        match self {
            Survival::SteadyState => "ss",
            Survival::GenerationalPool => "gen",
        }
    }
}

/// Replaces a uniformly drawn member with `s` if that member is strictly
/// worse. Returns whether a replacement happened.
pub fn select_steady_state<R: Rng + ?Sized>(pop: &mut Population, s: Individual, rng: &mut R) -> bool {
    let j = rng.gen_range(0..pop.len());
    if pop.get(j).fitness < s.fitness {
        pop.set(j, s);
        true
    } else {
        false
    }
}

/// Shuffle-and-split tournament selection: each round shuffles the candidates,
/// splits them into consecutive blocks of `size` (a short trailing block is
/// skipped) and keeps each block's best. Rounds repeat until `count` winners
/// are chosen. Fitness ties go to the earlier candidate in the block.
pub fn tournament_select<R: Rng + ?Sized>(
    candidates: &[Individual],
    count: usize,
    size: usize,
    rng: &mut R,
) -> Vec<Individual> {
    assert!(size >= 1 && candidates.len() >= size, "not enough tournament candidates");
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    let mut winners = Vec::with_capacity(count);
    while winners.len() < count {
        order.shuffle(rng);
        for block in order.chunks_exact(size) {
            if winners.len() == count {
                break;
            }
            let best = block
                .iter()
                .copied()
                .reduce(|a, b| if candidates[b].fitness > candidates[a].fitness { b } else { a })
                .expect("non-empty block");
            winners.push(candidates[best].clone());
        }
    }
    winners
}

/// Offspring collected between generational selections.
#[derive(Debug, Clone, Default)]
pub struct OffspringPool {
    entries: Vec<(u64, Individual)>,
    flushes: u64,
}

impl OffspringPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn flushes(&self) -> u64 {
        self.flushes
    }
}

/// Adds `s` (tagged with the producing task's id) to the pool. Once the pool
/// holds |P| offspring, the population is replaced by a P+O tournament and the
/// pool is cleared. Offspring enter the tournament ordered by tag, so the
/// result does not depend on completion order. Returns whether a flush ran.
pub fn select_generational_pool<R: Rng + ?Sized>(
    pop: &mut Population,
    pool: &mut OffspringPool,
    s: Individual,
    tag: u64,
    rng: &mut R,
) -> bool {
    pool.entries.push((tag, s));
    if pool.entries.len() < pop.len() {
        return false;
    }
    pool.entries.sort_by_key(|(tag, _)| *tag);
    let mut candidates: Vec<Individual> = pop.members().to_vec();
    candidates.extend(pool.entries.drain(..).map(|(_, ind)| ind));
    let winners = tournament_select(&candidates, pop.len(), TOURNAMENT_SIZE, rng);
    pop.replace_all(winners);
    pool.flushes += 1;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Genotype, RandomSource};

    fn ind(f: f64) -> Individual {
        Individual::new(Genotype::zeros(3), f, 1.0)
    }

    fn pop(fs: &[f64]) -> Population {
        fs.iter().map(|&f| ind(f)).collect::<Vec<_>>().into()
    }

    #[test]
    fn steady_state_rules() {
        let mut rng = RandomSource::new(0);
        let mut p = pop(&[5.0, 6.0, 7.0]);
        for _ in 0..50 {
            assert!(!select_steady_state(&mut p, ind(1.0), &mut rng));
        }
        assert_eq!(p, pop(&[5.0, 6.0, 7.0]));

        let mut p = pop(&[1.0, 1.0]);
        let before = p.mean_fitness().unwrap();
        assert!(select_steady_state(&mut p, ind(3.0), &mut rng));
        assert!(p.mean_fitness().unwrap() > before);
    }

    #[test]
    fn equal_fitness_never_replaces() {
        let mut rng = RandomSource::new(1);
        let mut p = pop(&[2.0, 2.0, 2.0, 2.0]);
        for _ in 0..100 {
            assert!(!select_steady_state(&mut p, ind(2.0), &mut rng));
        }
    }

    #[test]
    fn pool_flushes_every_pop_size() {
        let mut rng = RandomSource::new(2);
        let mut p = pop(&[0.0, 0.0, 0.0, 0.0]);
        let mut pool = OffspringPool::default();
        for i in 0..3 {
            assert!(!select_generational_pool(&mut p, &mut pool, ind(1.0), i, &mut rng));
            assert_eq!(p, pop(&[0.0, 0.0, 0.0, 0.0]));
        }
        assert!(select_generational_pool(&mut p, &mut pool, ind(1.0), 3, &mut rng));
        assert!(pool.is_empty());
        assert_eq!(pool.flushes(), 1);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn identical_candidates_keep_multiset() {
        let mut rng = RandomSource::new(3);
        let mut p = pop(&[4.0; 6]);
        let mut pool = OffspringPool::default();
        for i in 0..6 {
            select_generational_pool(&mut p, &mut pool, ind(4.0), i, &mut rng);
        }
        assert!(p.iter().all(|m| m.fitness == 4.0));
        assert_eq!(p.len(), 6);
    }

    #[test]
    fn four_of_eight_takes_two_rounds() {
        // |P| = 4: 8 candidates form 2 blocks per round, so two rounds give 4 winners.
        let mut rng = RandomSource::new(4);
        let cands: Vec<Individual> = (0..8).map(|i| ind(i as f64)).collect();
        let winners = tournament_select(&cands, 4, 4, &mut rng);
        assert_eq!(winners.len(), 4);
        // The overall best wins its block in both rounds.
        assert_eq!(winners.iter().filter(|w| w.fitness == 7.0).count(), 2);
        // Each round's two winners come from complementary blocks, so one of them is 7.
        assert!(winners[..2].iter().any(|w| w.fitness == 7.0));
        assert!(winners[2..].iter().any(|w| w.fitness == 7.0));
    }

    #[test]
    fn winners_are_block_maxima() {
        let mut rng = RandomSource::new(5);
        let cands: Vec<Individual> = (0..12).map(|i| ind((i * 7 % 12) as f64)).collect();
        let w = tournament_select(&cands, 6, 4, &mut rng);
        // Every winner beats at least three others.
        for x in &w {
            assert!(cands.iter().filter(|c| c.fitness < x.fitness).count() >= 3);
        }
    }
}
