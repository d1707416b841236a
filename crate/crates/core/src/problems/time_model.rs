use crate::error::{invalid, Result};
use crate::genotype::Genotype;

/// Relative evaluation-time endpoints `a:b`, where `a` is the cost of the
/// optimum's complement and `b` the cost of the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRatio {
    pub a: f64,
    pub b: f64,
}

impl TimeRatio {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid(alloc::format!(
                "time ratio components must be positive and finite, got {a}:{b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// The seven ratios from 100:1 (cheap optimum) to 1:100 (expensive optimum).
    pub fn benchmark_set() -> [TimeRatio; 7] {
        [
            (100.0, 1.0),
            (10.0, 1.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (1.0, 10.0),
            (1.0, 100.0),
        ]
        .map(|(a, b)| TimeRatio { a, b })
    }
}

impl core::fmt::Display for TimeRatio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl core::str::FromStr for TimeRatio {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| invalid(alloc::format!("ratio `{s}` is not of the form a:b")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| invalid(alloc::format!("ratio `{s}` has a non-numeric component")))
        };
        TimeRatio::new(parse(a)?, parse(b)?)
    }
}

/// Evaluation time interpolated linearly in the normalized Hamming distance to
/// the optimum: `E(s) = H(s, s*)·a + (1 − H(s, s*))·b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeModel {
    a: f64,
    b: f64,
    optimum: Genotype,
}

/// Builds the time model for `ratio` around `optimum`.
pub fn make_time_model(ratio: TimeRatio, optimum: Genotype) -> Result<TimeModel> {
    let ratio = TimeRatio::new(ratio.a, ratio.b)?;
    Ok(TimeModel {
        a: ratio.a,
        b: ratio.b,
        optimum,
    })
}

impl TimeModel {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn ratio(&self) -> TimeRatio {
        TimeRatio { a: self.a, b: self.b }
    }

    pub fn optimum(&self) -> &Genotype {
        &self.optimum
    }

    /// Caller guarantees `g.len() == optimum.len()`.
    pub(crate) fn eval_time_unchecked(&self, g: &Genotype) -> f64 {
        let len = self.optimum.len();
        if len == 0 {
            return self.b;
        }
        let h = g.hamming_unchecked(&self.optimum) as f64 / len as f64;
        h * self.a + (1.0 - h) * self.b
    }

    pub fn eval_time(&self, g: &Genotype) -> Result<f64> {
        crate::genotype::hamming_normalized(g, &self.optimum)?;
        Ok(self.eval_time_unchecked(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_and_midpoint() {
        let opt = Genotype::ones(10);
        let tm = make_time_model(TimeRatio::new(100.0, 1.0).unwrap(), opt.clone()).unwrap();
        assert_eq!(tm.eval_time(&opt).unwrap(), 1.0);
        assert_eq!(tm.eval_time(&opt.complement()).unwrap(), 100.0);
        let half: Genotype = "1111100000".parse().unwrap();
        assert_eq!(tm.eval_time(&half).unwrap(), 50.5);
    }

    #[test]
    fn ratio_examples() {
        let opt = Genotype::ones(6);
        let flat = make_time_model(TimeRatio::new(1.0, 1.0).unwrap(), opt.clone()).unwrap();
        for s in ["000000", "101010", "111111"] {
            assert_eq!(flat.eval_time(&s.parse().unwrap()).unwrap(), 1.0);
        }
        let expensive = make_time_model(TimeRatio::new(1.0, 100.0).unwrap(), opt.clone()).unwrap();
        assert_eq!(expensive.eval_time(&opt).unwrap(), 100.0);
        let cheap = make_time_model(TimeRatio::new(100.0, 1.0).unwrap(), opt.clone()).unwrap();
        assert_eq!(cheap.eval_time(&opt.complement()).unwrap(), 100.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(TimeRatio::new(0.0, 1.0).is_err());
        assert!(TimeRatio::new(1.0, -2.0).is_err());
        assert!(make_time_model(TimeRatio { a: 1.0, b: 0.0 }, Genotype::ones(3)).is_err());
        assert!("1:0".parse::<TimeRatio>().is_err());
        assert!("12".parse::<TimeRatio>().is_err());
        assert_eq!("10:1".parse::<TimeRatio>().unwrap(), TimeRatio { a: 10.0, b: 1.0 });
    }

    #[test]
    fn rejects_length_mismatch() {
        let tm = make_time_model(TimeRatio { a: 2.0, b: 1.0 }, Genotype::ones(4)).unwrap();
        assert!(tm.eval_time(&Genotype::ones(5)).is_err());
    }

    proptest! {
        #[test]
        fn affine_in_hamming_distance(
            a in 0.01f64..1000.0,
            b in 0.01f64..1000.0,
            (x, y, opt) in (1usize..60).prop_flat_map(|l| {
                let v = || proptest::collection::vec(0u8..=1, l);
                (v(), v(), v())
            }),
        ) {
            let opt = Genotype::new(opt).unwrap();
            let x = Genotype::new(x).unwrap();
            let y = Genotype::new(y).unwrap();
            let tm = make_time_model(TimeRatio::new(a, b).unwrap(), opt.clone()).unwrap();
            let hx = crate::hamming_normalized(&x, &opt).unwrap();
            let hy = crate::hamming_normalized(&y, &opt).unwrap();
            let lhs = tm.eval_time(&x).unwrap() - tm.eval_time(&y).unwrap();
            let rhs = (hx - hy) * (a - b);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + a.abs() + b.abs()));
        }
    }
}
