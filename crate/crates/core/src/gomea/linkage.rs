use alloc::vec;
use alloc::vec::Vec;

use crate::genotype::Population;

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log2(p)
        })
        .sum()
}

/// Normalized mutual information between every pair of variables:
/// `2·I(Xi;Xj) / (H(Xi) + H(Xj))`, base-2, from population frequencies.
/// The diagonal is 1, and a pair of constant variables is assigned 1.
pub fn nmi_matrix(pop: &Population) -> Vec<Vec<f64>> {
    let len = pop.members().first().map_or(0, |m| m.genotype.len());
    let n = pop.len() as f64;
    let mut ones = vec![0usize; len];
    for m in pop.iter() {
        for (i, &b) in m.genotype.bits().iter().enumerate() {
            ones[i] += b as usize;
        }
    }
    let h: Vec<f64> = ones
        .iter()
        .map(|&o| entropy(&[o, pop.len() - o], n))
        .collect();

    let mut nmi = vec![vec![1.0; len]; len];
    for i in 0..len {
        for j in i + 1..len {
            let mut joint = [0usize; 4];
            for m in pop.iter() {
                let bits = m.genotype.bits();
                joint[(bits[i] as usize) << 1 | bits[j] as usize] += 1;
            }
            let denom = h[i] + h[j];
            let value = if denom == 0.0 {
                1.0
            } else {
                let mi = denom - entropy(&joint, n);
                (2.0 * mi / denom).clamp(0.0, 1.0)
            };
            nmi[i][j] = value;
            nmi[j][i] = value;
        }
    }
    nmi
}

/// Linkage tree as a family of subsets: every singleton, then each merged
/// cluster in merge order, without the root.
///
/// Clusters are merged by UPGMA on `similarity`; the most similar pair wins,
/// ties going to the lowest pair of cluster positions. A merged cluster takes
/// the position of its first constituent.
pub fn linkage_tree(similarity: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let len = similarity.len();
    let mut fos: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
    if len <= 1 {
        return fos;
    }
    let mut clusters: Vec<Vec<usize>> = fos.clone();
    let mut sim: Vec<Vec<f64>> = similarity.to_vec();

    while clusters.len() > 1 {
        let mut best = (0, 1, f64::NEG_INFINITY);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if sim[i][j] > best.2 {
                    best = (i, j, sim[i][j]);
                }
            }
        }
        let (a, b, _) = best;
        let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
        for k in 0..clusters.len() {
            let merged = (na * sim[a][k] + nb * sim[b][k]) / (na + nb);
            sim[a][k] = merged;
            sim[k][a] = merged;
        }
        let moved = clusters.remove(b);
        sim.remove(b);
        for row in sim.iter_mut() {
            row.remove(b);
        }
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        if clusters.len() > 1 {
            fos.push(clusters[a].clone());
        }
    }
    fos
}

/// Learns the linkage-tree family of subsets from a population.
pub fn learn_linkage_tree(pop: &Population) -> Vec<Vec<usize>> {
    linkage_tree(&nmi_matrix(pop))
}
