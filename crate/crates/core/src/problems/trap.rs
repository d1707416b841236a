use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::genotype::Genotype;

/// Trap value of a single block with unitation `u` out of `k`.
pub fn dt_block(u: usize, k: usize) -> Result<f64> {
    if u > k {
        return Err(invalid(alloc::format!("unitation {u} exceeds block size {k}")));
    }
    Ok(trap_value(u, k))
}

#[inline]
fn trap_value(u: usize, k: usize) -> f64 {
    if u == k {
        k as f64
    } else {
        (k - u - 1) as f64
    }
}

/// Concatenated deceptive trap over `n_blocks` disjoint blocks of `k` bits.
/// The optimum is all-ones with fitness `n·k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeceptiveTrap {
    n_blocks: usize,
    k: usize,
}

impl DeceptiveTrap {
    pub fn new(n_blocks: usize, k: usize) -> Result<Self> {
        if n_blocks == 0 || k == 0 {
            return Err(invalid("deceptive trap needs n_blocks >= 1 and k >= 1"));
        }
        Ok(Self { n_blocks, k })
    }

    /// Trap of total length `len`, which must be a multiple of `k`.
    pub fn with_length(len: usize, k: usize) -> Result<Self> {
        if k == 0 || len % k != 0 {
            return Err(invalid(alloc::format!(
                "length {len} is not a multiple of block size {k}"
            )));
        }
        Self::new(len / k, k)
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.n_blocks * self.k
    }

    pub fn optimum(&self) -> Genotype {
        Genotype::ones(self.len())
    }

    pub fn optimum_value(&self) -> f64 {
        (self.n_blocks * self.k) as f64
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.n_blocks)
            .map(|b| (b * self.k..(b + 1) * self.k).collect())
            .collect()
    }

    pub(crate) fn fitness_unchecked(&self, g: &Genotype) -> f64 {
        g.bits()
            .chunks_exact(self.k)
            .map(|block| trap_value(block.iter().filter(|&&b| b == 1).count(), self.k))
            .sum()
    }
}
