use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::genotype::Genotype;
use crate::rng::RandomSource;

const MAX_BLOCK: usize = 16;

/// Adjacent NK-landscape: `n` overlapping blocks of `k` adjacent bits, block
/// `i` starting at `stride·i`, each scored by a random lookup table with
/// entries in `[0, 1]`. Total length is `stride·n + k − 1`.
///
/// Table index of a block reads its bits most-significant first.
#[derive(Debug, Clone, PartialEq)]
pub struct AnklProblem {
    k: usize,
    stride: usize,
    tables: Vec<Vec<f64>>,
    optimum: Genotype,
    optimum_value: f64,
}

/// Draws a random instance. Entries are consumed block by block, table index
/// ascending, from a single stream seeded by `rng`.
pub fn generate_ankl(n: usize, k: usize, stride: usize, rng: &mut RandomSource) -> Result<AnklProblem> {
    check_dims(n, k, stride)?;
    let tables = (0..n)
        .map(|_| (0..1usize << k).map(|_| rng.gen::<f64>()).collect())
        .collect();
    AnklProblem::from_tables(k, stride, tables)
}

fn check_dims(n: usize, k: usize, stride: usize) -> Result<()> {
    if n == 0 || k == 0 || stride == 0 || stride > k {
        return Err(invalid(alloc::format!(
            "invalid ANKL dimensions n={n}, k={k}, stride={stride} (need n>=1, k>=1, 1<=stride<=k)"
        )));
    }
    if k > MAX_BLOCK {
        return Err(invalid(alloc::format!("ANKL block size {k} exceeds {MAX_BLOCK}")));
    }
    Ok(())
}

impl AnklProblem {
    /// Builds an instance from explicit tables and solves it exactly.
    pub fn from_tables(k: usize, stride: usize, tables: Vec<Vec<f64>>) -> Result<Self> {
        check_dims(tables.len(), k, stride)?;
        for (i, t) in tables.iter().enumerate() {
            if t.len() != 1 << k {
                return Err(invalid(alloc::format!(
                    "table {i} has {} entries, expected {}",
                    t.len(),
                    1usize << k
                )));
            }
            if t.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(invalid(alloc::format!("table {i} has an entry outside [0, 1]")));
            }
        }
        let mut problem = Self {
            k,
            stride,
            tables,
            optimum: Genotype::zeros(0),
            optimum_value: 0.0,
        };
        problem.optimum = problem.solve();
        problem.optimum_value = problem.fitness_unchecked(&problem.optimum);
        Ok(problem)
    }

    pub fn n_blocks(&self) -> usize {
        self.tables.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.stride * self.n_blocks() + self.k - 1
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn optimum(&self) -> &Genotype {
        &self.optimum
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    fn block_index(&self, bits: &[u8], block: usize) -> usize {
        let start = block * self.stride;
        bits[start..start + self.k]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub(crate) fn fitness_unchecked(&self, g: &Genotype) -> f64 {
        let bits = g.bits();
        self.tables
            .iter()
            .enumerate()
            .map(|(i, t)| t[self.block_index(bits, i)])
            .sum()
    }

    /// Left-to-right dynamic program over the block chain. The state carried
    /// between blocks is the `k − stride` bits shared with the next block.
    /// Ties resolve to the lowest table index.
    fn solve(&self) -> Genotype {
        let k = self.k;
        let overlap = k - self.stride;
        let n_states = 1usize << overlap;
        let mask = n_states - 1;
        let n = self.n_blocks();

        let mut best = vec![f64::NEG_INFINITY; n_states];
        let mut choice: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, table) in self.tables.iter().enumerate() {
            let mut next = vec![f64::NEG_INFINITY; n_states];
            let mut pick = vec![usize::MAX; n_states];
            for (a, &v) in table.iter().enumerate() {
                let carried = if i == 0 { 0.0 } else { best[a >> self.stride] };
                let total = carried + v;
                let state = a & mask;
                if total > next[state] {
                    next[state] = total;
                    pick[state] = a;
                }
            }
            best = next;
            choice.push(pick);
        }

        let mut state = (0..n_states)
            .fold(0, |arg, s| if best[s] > best[arg] { s } else { arg });
        let mut bits = vec![0u8; self.len()];
        for i in (0..n).rev() {
            let a = choice[i][state];
            let start = i * self.stride;
            for j in 0..k {
                bits[start + j] = ((a >> (k - 1 - j)) & 1) as u8;
            }
            state = a >> self.stride;
        }
        Genotype::new(bits).expect("bits are binary")
    }

    /// Disjoint cover used by subfunction crossover: one `stride`-wide chunk
    /// per block start, then the `k − 1` trailing positions as a final chunk.
    pub fn crossover_partition(&self) -> Vec<Vec<usize>> {
        let mut parts: Vec<Vec<usize>> = (0..self.n_blocks())
            .map(|i| (i * self.stride..(i + 1) * self.stride).collect())
            .collect();
        let tail_start = self.n_blocks() * self.stride;
        if tail_start < self.len() {
            parts.push((tail_start..self.len()).collect());
        }
        parts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_max(p: &AnklProblem) -> f64 {
        let l = p.len();
        (0u64..1 << l)
            .map(|m| p.fitness_unchecked(&Genotype::from_bools((0..l).map(|i| m >> i & 1 == 1))))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn length_formula() {
        let p = generate_ankl(18, 5, 2, &mut RandomSource::new(1)).unwrap();
        assert_eq!(p.len(), 40);
    }

    #[test]
    fn single_block_optimum_is_table_argmax() {
        let p = generate_ankl(1, 3, 1, &mut RandomSource::new(9)).unwrap();
        let t = &p.tables()[0];
        let (arg, max) = t
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(ai, av), (i, &v)| if v > av { (i, v) } else { (ai, av) });
        assert_eq!(p.optimum_value(), max);
        let expect = Genotype::from_bools((0..3).map(|j| arg >> (2 - j) & 1 == 1));
        assert_eq!(p.optimum(), &expect);
    }

    #[test]
    fn dp_matches_enumeration_small() {
        for seed in 0..20 {
            let p = generate_ankl(3, 3, 1, &mut RandomSource::new(seed)).unwrap();
            assert_eq!(p.len(), 5);
            assert_eq!(p.optimum_value(), brute_force_max(&p));
        }
    }

    #[test]
    fn no_overlap_stride() {
        let p = generate_ankl(3, 2, 2, &mut RandomSource::new(4)).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.optimum_value(), brute_force_max(&p));
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_ankl(4, 5, 2, &mut RandomSource::new(3)).unwrap();
        let b = generate_ankl(4, 5, 2, &mut RandomSource::new(3)).unwrap();
        let c = generate_ankl(4, 5, 2, &mut RandomSource::new(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.tables(), c.tables());
    }

    #[test]
    fn invalid_dimensions() {
        let mut rng = RandomSource::new(0);
        assert!(generate_ankl(0, 5, 2, &mut rng).is_err());
        assert!(generate_ankl(3, 0, 1, &mut rng).is_err());
        assert!(generate_ankl(3, 2, 3, &mut rng).is_err());
        assert!(generate_ankl(3, 2, 0, &mut rng).is_err());
        assert!(AnklProblem::from_tables(2, 1, vec![vec![0.5; 3]]).is_err());
        assert!(AnklProblem::from_tables(2, 1, vec![vec![1.5; 4]]).is_err());
    }

    #[test]
    fn partition_is_disjoint_cover() {
        let p = generate_ankl(8, 5, 2, &mut RandomSource::new(0)).unwrap();
        let mut seen: Vec<usize> = p.crossover_partition().concat();
        seen.sort_unstable();
        assert_eq!(seen, (0..p.len()).collect::<Vec<_>>());
    }
}
