//! Problem specifications: `dt:l=50,k=5`, `ankl:l=40,k=5,stride=2,seed=3`, or
//! the path of a JSON instance file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use evotime_core::problems::{generate_ankl, AnklProblem, DeceptiveTrap, FitnessFunction, TimeRatio};
use evotime_core::{Genotype, ProblemInstance, RandomSource};
use serde::{Deserialize, Serialize};

/// Seed used for ANKL instances whose specification names none.
pub const DEFAULT_ANKL_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Trap { len: usize, k: usize },
    Ankl { n: usize, k: usize, stride: usize, seed: u64 },
    File(PathBuf),
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Trap { len, k } => write!(f, "dt:l={len},k={k}"),
            ProblemSpec::Ankl { n, k, stride, seed } => {
                write!(f, "ankl:l={},k={k},stride={stride},seed={seed}", stride * n + k - 1)
            }
            ProblemSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

fn parse_params(kind: &str, body: &str, allowed: &[&str]) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("`{part}` in {kind} problem is not key=value"))?;
        let key = key.trim();
        ensure!(
            allowed.contains(&key),
            "unknown {kind} parameter `{key}`; valid: {}",
            allowed.join(", ")
        );
        let value: u64 = value
            .trim()
            .parse()
            .with_context(|| format!("{kind} parameter `{key}` must be a nonnegative integer"))?;
        out.insert(key.to_string(), value);
    }
    Ok(out)
}

impl std::str::FromStr for ProblemSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("dt:") {
            let p = parse_params("dt", body, &["l", "k"])?;
            let k = *p.get("k").unwrap_or(&5) as usize;
            let len = *p.get("l").context("dt problem needs l=<length>")? as usize;
            DeceptiveTrap::with_length(len, k)?;
            return Ok(ProblemSpec::Trap { len, k });
        }
        if let Some(body) = s.strip_prefix("ankl:") {
            let p = parse_params("ankl", body, &["l", "n", "k", "stride", "seed"])?;
            let k = *p.get("k").unwrap_or(&5) as usize;
            let stride = *p.get("stride").unwrap_or(&2) as usize;
            ensure!(k >= 1 && stride >= 1, "ankl needs k >= 1 and stride >= 1");
            let n = match (p.get("n"), p.get("l")) {
                (Some(&n), _) => n as usize,
                (None, Some(&l)) => {
                    let l = l as usize;
                    ensure!(
                        l + 1 > k && (l + 1 - k) % stride == 0,
                        "ankl length {l} is not stride·n + k − 1 for k={k}, stride={stride}"
                    );
                    (l + 1 - k) / stride
                }
                (None, None) => bail!("ankl problem needs l=<length> or n=<blocks>"),
            };
            let seed = *p.get("seed").unwrap_or(&DEFAULT_ANKL_SEED);
            ensure!(n >= 1 && stride <= k, "invalid ankl dimensions n={n}, k={k}, stride={stride}");
            return Ok(ProblemSpec::Ankl { n, k, stride, seed });
        }
        let path = PathBuf::from(s);
        if path.extension().is_some_and(|e| e == "json") || path.exists() {
            return Ok(ProblemSpec::File(path));
        }
        bail!("unknown problem `{s}`; valid forms: dt:l=<len>,k=<k> | ankl:l=<len>,k=<k>,stride=<s>,seed=<seed> | <instance>.json")
    }
}

impl ProblemSpec {
    pub fn function(&self) -> Result<FitnessFunction> {
        Ok(match self {
            ProblemSpec::Trap { len, k } => FitnessFunction::Trap(DeceptiveTrap::with_length(*len, *k)?),
            ProblemSpec::Ankl { n, k, stride, seed } => {
                let mut rng = RandomSource::new(*seed);
                FitnessFunction::Ankl(generate_ankl(*n, *k, *stride, &mut rng)?)
            }
            ProblemSpec::File(path) => ProblemFile::load(path)?.into_function()?,
        })
    }

    pub fn instance(&self, ratio: TimeRatio) -> Result<ProblemInstance> {
        Ok(ProblemInstance::new(self.function()?, ratio)?)
    }
}

/// JSON form of a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemFile {
    Dt {
        len: usize,
        k: usize,
        optimum: String,
        target: f64,
    },
    Ankl {
        len: usize,
        n: usize,
        k: usize,
        stride: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        tables: Vec<Vec<f64>>,
        optimum: String,
        target: f64,
    },
}

impl ProblemFile {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let seed = match spec {
            ProblemSpec::Ankl { seed, .. } => Some(*seed),
            _ => None,
        };
        Ok(match spec.function()? {
            FitnessFunction::Trap(p) => ProblemFile::Dt {
                len: p.len(),
                k: p.k(),
                optimum: p.optimum().to_string(),
                target: p.optimum_value(),
            },
            FitnessFunction::Ankl(p) => ProblemFile::Ankl {
                len: p.len(),
                n: p.n_blocks(),
                k: p.k(),
                stride: p.stride(),
                seed,
                tables: p.tables().to_vec(),
                optimum: p.optimum().to_string(),
                target: p.optimum_value(),
            },
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing problem file {}", path.display()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rebuilds the fitness function and checks the stored optimum against
    /// the recomputed one.
    pub fn into_function(self) -> Result<FitnessFunction> {
        let (function, optimum, target) = match self {
            ProblemFile::Dt { len, k, optimum, target } => {
                (FitnessFunction::Trap(DeceptiveTrap::with_length(len, k)?), optimum, target)
            }
            ProblemFile::Ankl {
                len,
                n,
                k,
                stride,
                tables,
                optimum,
                target,
                ..
            } => {
                ensure!(tables.len() == n, "file lists {} tables but n={n}", tables.len());
                let p = AnklProblem::from_tables(k, stride, tables)?;
                ensure!(p.len() == len, "file length {len} does not match stride·n + k − 1 = {}", p.len());
                (FitnessFunction::Ankl(p), optimum, target)
            }
        };
        let optimum: Genotype = optimum.parse()?;
        ensure!(
            optimum == function.optimum() && target == function.optimum_value(),
            "stored optimum does not match the instance's exact optimum"
        );
        Ok(function)
    }
}

/// Parses `standard` (the seven benchmark ratios) or a comma-separated list of `a:b` ratios.
pub fn parse_ratios(s: &str) -> Result<Vec<TimeRatio>> {
    if s.trim() == "standard" {
        return Ok(TimeRatio::benchmark_set().to_vec());
    }
    s.split(',')
        .map(|r| r.trim().parse::<TimeRatio>().map_err(anyhow::Error::from))
        .collect()
}

/// Parses `a..b` (half-open), `a..=b` or a comma-separated list of seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..=b).collect());
    }
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().with_context(|| format!("bad seed `{x}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip() {
        let dt: ProblemSpec = "dt:l=50,k=5".parse().unwrap();
        assert_eq!(dt, ProblemSpec::Trap { len: 50, k: 5 });
        assert_eq!(dt.to_string(), "dt:l=50,k=5");
        let ankl: ProblemSpec = "ankl:l=40,k=5,stride=2,seed=9".parse().unwrap();
        assert_eq!(
            ankl,
            ProblemSpec::Ankl {
                n: 18,
                k: 5,
                stride: 2,
                seed: 9
            }
        );
        assert_eq!(ankl.to_string().parse::<ProblemSpec>().unwrap(), ankl);
    }

    #[test]
    fn bad_specs() {
        for s in ["dt:l=52,k=5", "dt:k=5", "ankl:l=41,k=5,stride=2", "dt:l=50,q=1", "foo"] {
            assert!(s.parse::<ProblemSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn json_round_trip() {
        let spec: ProblemSpec = "ankl:l=20,k=5,stride=2,seed=4".parse().unwrap();
        let file = ProblemFile::from_spec(&spec).unwrap();
        let back: ProblemFile = serde_json::from_str(&file.to_json().unwrap()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.into_function().unwrap(), spec.function().unwrap());
    }

    #[test]
    fn tampered_optimum_is_rejected() {
        let spec: ProblemSpec = "dt:l=10,k=5".parse().unwrap();
        let mut file = ProblemFile::from_spec(&spec).unwrap();
        if let ProblemFile::Dt { target, .. } = &mut file {
            *target = 9.0;
        }
        assert!(file.into_function().is_err());
    }

    #[test]
    fn ratio_and_seed_lists() {
        assert_eq!(parse_ratios("standard").unwrap().len(), 7);
        assert_eq!(parse_ratios("10:1, 1:10").unwrap()[1], TimeRatio::new(1.0, 10.0).unwrap());
        assert!(parse_ratios("1:0").is_err());
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("5,7").unwrap(), vec![5, 7]);
    }
}
