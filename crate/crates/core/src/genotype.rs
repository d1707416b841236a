use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Fixed-length bitstring. Each element is 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype(Vec<u8>);

impl Genotype {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(invalid(alloc::format!("bit {pos} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self(bits.into_iter().map(u8::from).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(alloc::vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(alloc::vec![1; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| u8::from(rng.gen::<bool>())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        debug_assert!(bit <= 1);
        self.0[i] = bit;
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|&b| 1 - b).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Number of differing positions; lengths must already agree.
    pub(crate) fn hamming_unchecked(&self, other: &Genotype) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Copies `positions` from `donor`; returns whether any bit changed.
    pub fn copy_positions(&mut self, donor: &Genotype, positions: &[usize]) -> bool {
        let mut changed = false;
        for &i in positions {
            if self.0[i] != donor.0[i] {
                self.0[i] = donor.0[i];
                changed = true;
            }
        }
        changed
    }

    /// Whether `donor` carries different values at any of `positions`.
    pub fn differs_at(&self, donor: &Genotype, positions: &[usize]) -> bool {
        positions.iter().any(|&i| self.0[i] != donor.0[i])
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genotype({self})")
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl core::str::FromStr for Genotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid(alloc::format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Genotype)
    }
}

/// Normalized Hamming distance: differing positions divided by the length.
pub fn hamming_normalized(a: &Genotype, b: &Genotype) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.hamming_unchecked(b) as f64 / a.len() as f64)
}

/// An evaluated (or placeholder) solution.
///
/// `fitness` and `eval_time` come from a single evaluation of the owning
/// problem. A placeholder, inserted before its evaluation completes, has
/// fitness `-inf` so any evaluated solution compares better.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: f64,
    pub eval_time: f64,
}

impl Individual {
    pub fn new(genotype: Genotype, fitness: f64, eval_time: f64) -> Self {
        Self {
            genotype,
            fitness,
            eval_time,
        }
    }

    pub fn placeholder(genotype: Genotype) -> Self {
        Self {
            genotype,
            fitness: f64::NEG_INFINITY,
            eval_time: f64::NAN,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness != f64::NEG_INFINITY
    }
}

/// Ordered collection of individuals with a fixed size during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Population {
    members: Vec<Individual>,
}

impl Population {
    pub fn new(members: Vec<Individual>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn members_mut(&mut self) -> &mut [Individual] {
        &mut self.members
    }

    pub fn get(&self, i: usize) -> &Individual {
        &self.members[i]
    }

    pub fn set(&mut self, i: usize, ind: Individual) {
        self.members[i] = ind;
    }

    pub fn push(&mut self, ind: Individual) {
        self.members.push(ind);
    }

    pub fn replace_all(&mut self, members: Vec<Individual>) {
        self.members = members;
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Individual> {
        self.members.iter()
    }

    /// Mean fitness over evaluated members, `None` when no member is evaluated.
    pub fn mean_fitness(&self) -> Option<f64> {
        let (sum, n) = self
            .members
            .iter()
            .filter(|m| m.is_evaluated())
            .fold((0.0, 0usize), |(s, n), m| (s + m.fitness, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// True iff every genotype equals the first one.
    pub fn converged(&self) -> bool {
        match self.members.split_first() {
            None => false,
            Some((first, rest)) => rest.iter().all(|m| m.genotype == first.genotype),
        }
    }
}

impl From<Vec<Individual>> for Population {
    fn from(members: Vec<Individual>) -> Self {
        Self::new(members)
    }
}

/// Whether all genotypes in `pop` are identical. Empty populations are rejected.
pub fn population_converged(pop: &Population) -> Result<bool> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    Ok(pop.converged())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn g(s: &str) -> Genotype {
        s.parse().unwrap()
    }

    fn pop(gs: &[&str]) -> Population {
        gs.iter()
            .map(|s| Individual::new(g(s), 0.0, 1.0))
            .collect::<Vec<_>>()
            .into()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_normalized(&g("0000"), &g("0000")).unwrap(), 0.0);
        assert_eq!(hamming_normalized(&g("0000"), &g("1111")).unwrap(), 1.0);
        assert_eq!(hamming_normalized(&g("0011"), &g("0001")).unwrap(), 0.25);
    }

    #[test]
    fn hamming_rejects_length_mismatch() {
        assert_eq!(
            hamming_normalized(&g("000"), &g("0000")),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 4
            })
        );
    }

    #[test]
    fn convergence_examples() {
        assert_eq!(population_converged(&pop(&["0101", "0101", "0101"])), Ok(true));
        assert_eq!(population_converged(&pop(&["0101", "0100", "0101"])), Ok(false));
        assert_eq!(
            population_converged(&Population::default()),
            Err(Error::EmptyPopulation)
        );
    }

    #[test]
    fn rejects_non_binary() {
        assert!(Genotype::new(vec![0, 1, 2]).is_err());
        assert!("01x".parse::<Genotype>().is_err());
    }

    #[test]
    fn placeholder_loses_to_anything() {
        let p = Individual::placeholder(g("01"));
        assert!(!p.is_evaluated());
        assert!(p.fitness < -1e300);
    }

    fn bits(len: usize) -> impl Strategy<Value = Genotype> {
        proptest::collection::vec(0u8..=1, len).prop_map(|v| Genotype::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn hamming_properties((a, b) in (1usize..64).prop_flat_map(|l| (bits(l), bits(l)))) {
            let ab = hamming_normalized(&a, &b).unwrap();
            let ba = hamming_normalized(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab == 0.0, a == b);
            prop_assert_eq!(ab == 1.0, a.complement() == b);
        }
    }
}
