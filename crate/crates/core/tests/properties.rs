use evotime_core::ga::{select_steady_state, Crossover};
use evotime_core::problems::{make_time_model, TimeRatio};
use evotime_core::search::{bisect_min_popsize, Probe, SearchConfig};
use evotime_core::stats::{holm_bonferroni, mann_whitney_u, midranks, quantile};
use evotime_core::{Genotype, Individual, Population, RandomSource};
use proptest::prelude::*;

fn genotype(len: usize) -> impl Strategy<Value = Genotype> {
    proptest::collection::vec(any::<bool>(), len).prop_map(Genotype::from_bools)
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((0u32..20).prop_map(f64::from), 1..25)
}

proptest! {
    #[test]
    fn eval_time_is_affine_in_hamming_distance(
        (opt, g) in (1usize..40).prop_flat_map(|l| (genotype(l), genotype(l))),
        a in 0.5f64..100.0,
        b in 0.5f64..100.0,
    ) {
        let model = make_time_model(TimeRatio::new(a, b).unwrap(), opt.clone()).unwrap();
        let h = (0..g.len()).filter(|&i| g.get(i) != opt.get(i)).count() as f64 / g.len() as f64;
        let t = model.eval_time(&g).unwrap();
        prop_assert!((t - (h * a + (1.0 - h) * b)).abs() <= 1e-12 * a.max(b));
        prop_assert_eq!(model.eval_time(&opt).unwrap(), b);
        prop_assert_eq!(model.eval_time(&opt.complement()).unwrap(), a);
    }

    #[test]
    fn crossover_children_inherit_every_bit(
        (p0, p1) in (2usize..60).prop_flat_map(|l| (genotype(l), genotype(l))),
        seed in any::<u64>(),
        block in 1usize..6,
    ) {
        let len = p0.len();
        let partition: Vec<Vec<usize>> = (0..len).collect::<Vec<_>>().chunks(block).map(<[usize]>::to_vec).collect();
        let ops = [Crossover::Uniform, Crossover::TwoPoint, Crossover::subfunction(partition.clone(), len).unwrap()];
        let mut rng = RandomSource::new(seed);
        for op in &ops {
            let child = op.apply(&p0, &p1, &mut rng).unwrap();
            prop_assert_eq!(child.len(), len);
            for i in 0..len {
                prop_assert!(child.get(i) == p0.get(i) || child.get(i) == p1.get(i));
            }
        }
        let child = ops[2].apply(&p0, &p1, &mut rng).unwrap();
        for part in &partition {
            let from0 = part.iter().all(|&i| child.get(i) == p0.get(i));
            let from1 = part.iter().all(|&i| child.get(i) == p1.get(i));
            prop_assert!(from0 || from1);
        }
    }

    #[test]
    fn steady_state_never_lowers_the_mean(
        fitness in proptest::collection::vec(0u32..50, 2..20),
        offspring in 0u32..60,
        seed in any::<u64>(),
    ) {
        let members: Vec<Individual> = fitness
            .iter()
            .enumerate()
            .map(|(i, &f)| Individual::new(Genotype::from_bools((0..8).map(|b| i >> b & 1 == 1)), f64::from(f), 1.0))
            .collect();
        let mut pop = Population::new(members);
        let before = pop.mean_fitness().unwrap();
        let worst = fitness.iter().copied().min().unwrap();
        let s = Individual::new(Genotype::ones(8), f64::from(offspring), 1.0);
        let replaced = select_steady_state(&mut pop, s, &mut RandomSource::new(seed));
        if offspring <= worst {
            prop_assert!(!replaced);
        }
        prop_assert!(pop.mean_fitness().unwrap() >= before);
        prop_assert_eq!(pop.len(), fitness.len());
    }

    #[test]
    fn midranks_sum_and_u_complement(a in sample(), b in sample()) {
        let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
        let n = pooled.len() as f64;
        let total: f64 = midranks(&pooled).iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        prop_assert!((ab.u + ba.u - (a.len() * b.len()) as f64).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab.p));
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
    }

    #[test]
    fn holm_rejects_a_prefix_of_sorted_pvalues(p in proptest::collection::vec(0.0f64..=1.0, 1..30), alpha in 0.001f64..0.2) {
        let reject = holm_bonferroni(&p, alpha).unwrap();
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
        let flags: Vec<bool> = order.iter().map(|&i| reject[i]).collect();
        let k = flags.iter().take_while(|&&r| r).count();
        prop_assert!(flags[k..].iter().all(|&r| !r));
        for (i, &r) in reject.iter().enumerate() {
            if r {
                prop_assert!(p[i] <= alpha);
            }
        }
    }

    #[test]
    fn quantiles_are_monotone_and_bounded(v in sample(), q0 in 0.0f64..=1.0, q1 in 0.0f64..=1.0) {
        let (lo, hi) = (q0.min(q1), q0.max(q1));
        let (a, b) = (quantile(&v, lo).unwrap(), quantile(&v, hi).unwrap());
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(min <= a && a <= b && b <= max);
    }

    #[test]
    fn bisection_finds_threshold(threshold in 4usize..3000, base_half in 2usize..64) {
        let cfg = SearchConfig { base: 2 * base_half, min_pop: 4, max_pop: 2048 };
        let r = bisect_min_popsize(&cfg, |p| {
            Ok(Probe { pop_size: p, success: p >= threshold, simulated_time: 0.0, evaluations: 0 })
        })
        .unwrap();
        // A success at the base size ends the search without bisecting below.
        let expect = (threshold.div_ceil(2) * 2).max(cfg.base);
        if expect <= 2048 {
            prop_assert_eq!(r.minimal, Some(expect));
        } else {
            prop_assert_eq!(r.minimal, None);
        }
        prop_assert!(r.trace.iter().all(|p| p.pop_size % 2 == 0 && (4..=2048).contains(&p.pop_size)));
    }
}
