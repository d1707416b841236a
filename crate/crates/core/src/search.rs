//! Population-size searches: doubling + bisection for the smallest
//! population that solves a problem, and doubling + golden-section for the
//! population size with the shortest time to solution.
//!
//! Population sizes live on the lattice of even integers in
//! `[min_pop, max_pop]`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::algorithm::{run, RunConfig};
use crate::error::{invalid, Result};
use crate::problems::ProblemInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// First size tried by the doubling phase.
    pub base: usize,
    pub min_pop: usize,
    pub max_pop: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            base: 8,
            min_pop: 4,
            max_pop: 4096,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let even = |x: usize| x % 2 == 0;
        if !(even(self.base) && even(self.min_pop) && even(self.max_pop)) {
            return Err(invalid("population sizes in a search must be even"));
        }
        if self.min_pop < 4 || self.base < self.min_pop || self.base > self.max_pop {
            return Err(invalid("search needs 4 <= min_pop <= base <= max_pop"));
        }
        Ok(())
    }
}

/// Outcome of one run during a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub pop_size: usize,
    pub success: bool,
    pub simulated_time: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    /// Smallest successful size, `None` if no size up to `max_pop` succeeded.
    pub minimal: Option<usize>,
    pub trace: Vec<Probe>,
}

impl BisectionResult {
    pub fn max_probed(&self) -> usize {
        self.trace.iter().map(|p| p.pop_size).max().unwrap_or(0)
    }
}

/// Doubles from `cfg.base` (the last step clamped to `cfg.max_pop`) until a
/// run succeeds, then bisects between the largest failure and the smallest
/// success.
pub fn bisect_min_popsize<F>(cfg: &SearchConfig, mut probe: F) -> Result<BisectionResult>
where
    F: FnMut(usize) -> Result<Probe>,
{
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut lo = None;
    let mut p = cfg.base;
    let hi = loop {
        let r = probe(p)?;
        trace.push(r);
        if r.success {
            break p;
        }
        lo = Some(p);
        if p >= cfg.max_pop {
            return Ok(BisectionResult { minimal: None, trace });
        }
        p = (p * 2).min(cfg.max_pop);
    };
    let Some(mut lo) = lo else {
        return Ok(BisectionResult {
            minimal: Some(hi),
            trace,
        });
    };
    let mut hi = hi;
    while hi - lo > 2 {
        let mid = (lo + hi) / 2 / 2 * 2;
        let mid = if mid <= lo { lo + 2 } else { mid };
        let r = probe(mid)?;
        trace.push(r);
        if r.success {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionResult {
        minimal: Some(hi),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenResult {
    /// Size with the shortest time among all probed sizes (smallest size on
    /// ties), and that time. `None` if no probed size succeeded.
    pub best: Option<(usize, f64)>,
    /// Every probed size with its time, `None` for failures.
    pub trace: Vec<(usize, Option<f64>)>,
}

struct Memo<F> {
    f: F,
    seen: BTreeMap<usize, f64>,
    trace: Vec<(usize, Option<f64>)>,
}

impl<F: FnMut(usize) -> Result<Option<f64>>> Memo<F> {
    fn get(&mut self, p: usize) -> Result<f64> {
        if let Some(&t) = self.seen.get(&p) {
            return Ok(t);
        }
        let t = (self.f)(p)?;
        self.trace.push((p, t));
        let t = t.unwrap_or(f64::INFINITY);
        self.seen.insert(p, t);
        Ok(t)
    }

    /// Unevaluated lattice point strictly inside `(lo, hi)` closest to
    /// `target`, preferring the larger one on ties.
    fn free_point(&self, lo: usize, hi: usize, target: f64, cfg: &SearchConfig) -> Option<usize> {
        let first = (lo + 2).max(cfg.min_pop);
        let last = hi.saturating_sub(2).min(cfg.max_pop);
        let mut best: Option<(f64, usize)> = None;
        let mut p = first + first % 2;
        while p <= last {
            if !self.seen.contains_key(&p) {
                let d = (p as f64 - target).abs();
                if best.map_or(true, |(bd, _)| d <= bd) {
                    best = Some((d, p));
                }
            }
            p += 2;
        }
        best.map(|(_, p)| p)
    }
}

/// Minimizes the time to solution over population sizes.
///
/// `probe` returns the time needed by a population of the given size, or
/// `None` if it failed; failures count as infinitely slow. Bracket ends
/// outside the lattice are virtual points with infinite time.
pub fn golden_min_time<F>(cfg: &SearchConfig, probe: F) -> Result<GoldenResult>
where
    F: FnMut(usize) -> Result<Option<f64>>,
{
    cfg.validate()?;
    let mut m = Memo {
        f: probe,
        seen: BTreeMap::new(),
        trace: Vec::new(),
    };

    // Doubling until the first success.
    let mut p0 = cfg.min_pop - 2;
    let mut p1 = cfg.base;
    while m.get(p1)?.is_infinite() {
        if p1 * 2 > cfg.max_pop {
            return Ok(GoldenResult {
                best: None,
                trace: m.trace,
            });
        }
        p0 = p1;
        p1 *= 2;
    }
    // Keep doubling while larger populations are faster.
    let mut p2;
    loop {
        p2 = p1 * 2;
        if p2 > cfg.max_pop {
            p2 = cfg.max_pop + 2;
            break;
        }
        if m.get(p2)? >= m.get(p1)? {
            break;
        }
        p0 = p1;
        p1 = p2;
    }

    loop {
        let span = (p2 - p0) as f64;
        let left_longer = p1 - p0 > p2 - p1;
        let (first, second) = if left_longer {
            ((p0, p1, p0 as f64 + span / 3.0), (p1, p2, p0 as f64 + 2.0 * span / 3.0))
        } else {
            ((p1, p2, p0 as f64 + 2.0 * span / 3.0), (p0, p1, p0 as f64 + span / 3.0))
        };
        let p3 = m
            .free_point(first.0, first.1, first.2, cfg)
            .or_else(|| m.free_point(second.0, second.1, second.2, cfg));
        let Some(p3) = p3 else {
            break;
        };
        let t1 = m.get(p1)?;
        let t3 = m.get(p3)?;
        if p3 > p1 {
            if t3 > t1 {
                p2 = p3;
            } else {
                p0 = p1;
                p1 = p3;
            }
        } else if t3 > t1 {
            p0 = p3;
        } else {
            p2 = p1;
            p1 = p3;
        }
    }

    let best = m
        .seen
        .iter()
        .filter(|(_, t)| t.is_finite())
        .fold(None, |acc: Option<(usize, f64)>, (&p, &t)| match acc {
            Some((_, bt)) if bt <= t => acc,
            _ => Some((p, t)),
        });
    Ok(GoldenResult { best, trace: m.trace })
}

fn probe_run(problem: &ProblemInstance, template: &RunConfig, pop_size: usize) -> Result<Probe> {
    let mut config = template.clone();
    config.population_size = pop_size;
    if template.workers.is_none() {
        config.workers = None;
    }
    let stats = run(problem, &config)?;
    Ok(Probe {
        pop_size,
        success: stats.success(),
        simulated_time: stats.simulated_time,
        evaluations: stats.evaluations_issued,
    })
}

/// [`bisect_min_popsize`] over runs of `template` with varying population
/// size.
pub fn bisect_runs(problem: &ProblemInstance, template: &RunConfig, cfg: &SearchConfig) -> Result<BisectionResult> {
    bisect_min_popsize(cfg, |p| probe_run(problem, template, p))
}

/// [`golden_min_time`] over runs of `template` with varying population size.
pub fn golden_runs(problem: &ProblemInstance, template: &RunConfig, cfg: &SearchConfig) -> Result<GoldenResult> {
    golden_min_time(cfg, |p| {
        let r = probe_run(problem, template, p)?;
        Ok(r.success.then_some(r.simulated_time))
    })
}
