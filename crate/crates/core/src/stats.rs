//! Rank statistics: Mann-Whitney U, Holm-Bonferroni, quartiles.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Largest smaller-sample size for which the exact null distribution is used
/// (tie-free samples only).
pub const EXACT_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// `a` tends to be larger than `b`.
    Greater,
    /// `a` tends to be smaller than `b`.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample: number of pairs `(x, y)` with `x > y`,
    /// ties counting one half.
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// Midranks (1-based) of `values`.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    mann_whitney_u_with(a, b, Alternative::TwoSided)
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], alternative: Alternative) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("both samples must be nonempty"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(invalid("samples contain NaN"));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum: f64 = ranks[..na].iter().sum();
    let u = rank_sum - (na * (na + 1)) as f64 / 2.0;

    let tie_term = tie_term(&pooled);
    if na.min(nb) <= EXACT_MAX && tie_term == 0.0 {
        let dist = u_distribution(na, nb);
        let total: f64 = dist.iter().sum();
        // U is an integer without ties.
        let k = u as usize;
        let lower = dist[..=k].iter().sum::<f64>() / total;
        let upper = dist[k..].iter().sum::<f64>() / total;
        let p = match alternative {
            Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
            Alternative::Greater => upper,
            Alternative::Less => lower,
        };
        return Ok(MannWhitney { u, p, exact: true });
    }

    let n = (na + nb) as f64;
    let mean = (na * nb) as f64 / 2.0;
    let var = (na * nb) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if var <= 0.0 {
        match alternative {
            Alternative::TwoSided => 1.0,
            _ => 0.5,
        }
    } else {
        let sd = libm::sqrt(var);
        match alternative {
            Alternative::TwoSided => {
                let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
                libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
            }
            Alternative::Greater => upper_tail((u - mean - 0.5) / sd),
            Alternative::Less => upper_tail((mean - u - 0.5) / sd),
        }
    };
    Ok(MannWhitney { u, p, exact: false })
}

fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// `Σ (t³ − t)` over groups of tied values.
fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        total += t * t * t - t;
        i = j;
    }
    total
}

/// Number of arrangements giving each value of U, for sample sizes `m`, `n`.
pub fn u_distribution(m: usize, n: usize) -> Vec<f64> {
    // f[i][j][u]: count for sizes (i, j); f(i, j, u) = f(i−1, j, u−j) + f(i, j−1, u)
    let max = m * n;
    let mut prev: Vec<Vec<f64>> = (0..=n).map(|_| vec![0.0; max + 1]).collect();
    for row in prev.iter_mut() {
        row[0] = 1.0;
    }
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = (0..=n).map(|_| vec![0.0; max + 1]).collect();
        cur[0][0] = 1.0;
        for j in 1..=n {
            for u in 0..=i * j {
                let mut c = cur[j - 1][u];
                if u >= j {
                    c += prev[j][u - j];
                }
                cur[j][u] = c;
            }
        }
        prev = cur;
    }
    prev.swap_remove(n)
}

/// Holm-Bonferroni step-down procedure. Returns reject decisions in input
/// order.
pub fn holm_bonferroni(pvalues: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if pvalues.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("p-values must lie in [0, 1]"));
    }
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| pvalues[i].total_cmp(&pvalues[j]));
    let mut reject = vec![false; m];
    for (rank, &i) in order.iter().enumerate() {
        if pvalues[i] <= alpha / (m - rank) as f64 {
            reject[i] = true;
        } else {
            break;
        }
    }
    Ok(reject)
}

/// Linearly interpolated quantile of `values` (`q` in [0, 1]); the median of
/// an even count is the midpoint of the two central values.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    Some(Quartiles {
        q25: quantile(values, 0.25)?,
        median: quantile(values, 0.5)?,
        q75: quantile(values, 0.75)?,
    })
}
