use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::genotype::Genotype;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossoverKind {
    Uniform,
    TwoPoint,
    Subfunction,
}

impl CrossoverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossoverKind::Uniform => "ux",
            CrossoverKind::TwoPoint => "tpx",
            CrossoverKind::Subfunction => "sfx",
        }
    }
}

/// Recombination operator producing one offspring from two parents.
#[derive(Debug, Clone, PartialEq)]
pub enum Crossover {
    /// Each position from either parent with probability 0.5.
    Uniform,
    /// Two uniformly drawn cut points; the middle segment comes from the
    /// second parent.
    TwoPoint,
    /// Each block of the partition taken wholesale from either parent with
    /// probability 0.5.
    Subfunction(Vec<Vec<usize>>),
}

impl Crossover {
    /// Checks that `partition` covers `0..len` disjointly.
    pub fn subfunction(partition: Vec<Vec<usize>>, len: usize) -> Result<Self> {
        let mut seen = vec![false; len];
        for &i in partition.iter().flatten() {
            if i >= len || seen[i] {
                return Err(invalid(alloc::format!(
                    "subfunction partition is not a disjoint cover (position {i})"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(invalid("subfunction partition leaves positions uncovered"));
        }
        Ok(Crossover::Subfunction(partition))
    }

    pub fn kind(&self) -> CrossoverKind {
        match self {
            Crossover::Uniform => CrossoverKind::Uniform,
            Crossover::TwoPoint => CrossoverKind::TwoPoint,
            Crossover::Subfunction(_) => CrossoverKind::Subfunction,
        }
    }

    pub fn apply<R: Rng + ?Sized>(&self, p0: &Genotype, p1: &Genotype, rng: &mut R) -> Result<Genotype> {
        if p0.len() != p1.len() {
            return Err(Error::LengthMismatch {
                expected: p0.len(),
                actual: p1.len(),
            });
        }
        let len = p0.len();
        let mut child = p0.clone();
        match self {
            Crossover::Uniform => {
                for i in 0..len {
                    if rng.gen::<bool>() {
                        child.set(i, p1.get(i));
                    }
                }
            }
            Crossover::TwoPoint => {
                let a = rng.gen_range(0..=len);
                let b = rng.gen_range(0..=len);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                for i in lo..hi {
                    child.set(i, p1.get(i));
                }
            }
            Crossover::Subfunction(blocks) => {
                if blocks.iter().flatten().any(|&i| i >= len) {
                    return Err(invalid("subfunction partition does not match genotype length"));
                }
                for block in blocks {
                    if rng.gen::<bool>() {
                        child.copy_positions(p1, block);
                    }
                }
            }
        }
        Ok(child)
    }
}

/// Free-function form of [`Crossover::apply`].
pub fn crossover<R: Rng + ?Sized>(op: &Crossover, p0: &Genotype, p1: &Genotype, rng: &mut R) -> Result<Genotype> {
    op.apply(p0, p1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomSource;

    fn blocks(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0..n).map(|b| (b * k..b * k + k).collect()).collect()
    }

    #[test]
    fn identical_parents_give_identical_child() {
        let mut rng = RandomSource::new(1);
        let g = Genotype::random(20, &mut rng);
        for op in [
            Crossover::Uniform,
            Crossover::TwoPoint,
            Crossover::subfunction(blocks(4, 5), 20).unwrap(),
        ] {
            for _ in 0..50 {
                assert_eq!(op.apply(&g, &g, &mut rng).unwrap(), g);
            }
        }
    }

    #[test]
    fn positions_come_from_a_parent() {
        let mut rng = RandomSource::new(2);
        for op in [Crossover::Uniform, Crossover::TwoPoint] {
            for _ in 0..200 {
                let a = Genotype::random(17, &mut rng);
                let b = Genotype::random(17, &mut rng);
                let c = op.apply(&a, &b, &mut rng).unwrap();
                for i in 0..17 {
                    assert!(c.get(i) == a.get(i) || c.get(i) == b.get(i));
                }
            }
        }
    }

    #[test]
    fn two_point_takes_one_contiguous_segment() {
        let mut rng = RandomSource::new(3);
        let a = Genotype::zeros(30);
        let b = Genotype::ones(30);
        for _ in 0..500 {
            let c = Crossover::TwoPoint.apply(&a, &b, &mut rng).unwrap();
            let runs = c.bits().windows(2).filter(|w| w[0] != w[1]).count();
            assert!(runs <= 2);
        }
    }

    #[test]
    fn subfunction_keeps_blocks_whole() {
        // Exhaustive over all parent pairs of a 2-block, k=3 trap layout.
        let op = Crossover::subfunction(blocks(2, 3), 6).unwrap();
        let mut rng = RandomSource::new(4);
        for ma in 0u32..64 {
            for mb in 0u32..64 {
                let a = Genotype::from_bools((0..6).map(|i| ma >> i & 1 == 1));
                let b = Genotype::from_bools((0..6).map(|i| mb >> i & 1 == 1));
                let c = op.apply(&a, &b, &mut rng).unwrap();
                for blk in blocks(2, 3) {
                    let from_a = blk.iter().all(|&i| c.get(i) == a.get(i));
                    let from_b = blk.iter().all(|&i| c.get(i) == b.get(i));
                    assert!(from_a || from_b);
                }
            }
        }
    }

    #[test]
    fn uniform_inheritance_is_balanced() {
        let mut rng = RandomSource::new(5);
        let a = Genotype::zeros(10);
        let b = Genotype::ones(10);
        let trials = 10_000;
        let mut from_b = [0usize; 10];
        for _ in 0..trials {
            let c = Crossover::Uniform.apply(&a, &b, &mut rng).unwrap();
            for (i, n) in from_b.iter_mut().enumerate() {
                *n += c.get(i) as usize;
            }
        }
        for n in from_b {
            let freq = n as f64 / trials as f64;
            assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(Crossover::subfunction(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(Crossover::subfunction(vec![vec![0, 1]], 3).is_err());
        assert!(Crossover::subfunction(vec![vec![0, 5]], 3).is_err());
        let op = Crossover::subfunction(blocks(2, 3), 6).unwrap();
        let mut rng = RandomSource::new(0);
        assert!(op.apply(&Genotype::zeros(4), &Genotype::ones(4), &mut rng).is_err());
        assert!(Crossover::Uniform
            .apply(&Genotype::zeros(4), &Genotype::ones(5), &mut rng)
            .is_err());
    }
}
