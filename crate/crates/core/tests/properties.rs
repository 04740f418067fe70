mod common;

use common::*;
use proptest::prelude::*;
use rand::RngExt;

use tlim::estimators::{additive_interaction, multiplicative_interaction, EstimatorConfig, TargetSpec};
use tlim::simulators::{metropolis, ExactDistribution, HamiltonianConfig, SamplerConfig};
use tlim::store::packed;
use tlim::uncertainty::bin_report;
use tlim::{Assignment, DataView};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn estimators_match_brute_force_on_random_tables(seed in any::<u64>(), n_vars in 2usize..=8) {
        let mut r = rng(seed);
        let lw = random_log_weights(n_vars, &mut r);
        for _ in 0..4 {
            let (t, c) = random_tuple(n_vars, 4, &mut r);
            let gap = oracle_gap(&lw, n_vars, &t, &c);
            prop_assert!(gap < 1e-10, "targets {t:?} cond {c:?} gap {gap:e}");
        }
    }

    #[test]
    fn rbm_closed_form_matches_enumeration(seed in any::<u64>(), m in 2usize..=8, hidden in 1usize..=4) {
        let mut r = rng(seed);
        let p = random_rbm(m, hidden, &mut r);
        for _ in 0..3 {
            let (t, _) = random_tuple(m, 4, &mut r);
            let gap = rbm_gap(&p, &t);
            prop_assert!(gap < 1e-10, "{t:?}: {gap:e}");
        }
    }

    #[test]
    fn rbm_couplings_ignore_visible_biases(seed in any::<u64>(), m in 2usize..=7) {
        let mut r = rng(seed);
        let p = random_rbm(m, 3, &mut r);
        let mut q = p.clone();
        for b in &mut q.b {
            *b += r.random_range(-3.0..3.0);
        }
        let (t, _) = random_tuple(m, 4, &mut r);
        if t.len() >= 2 {
            prop_assert_eq!(p.npoint_log_interaction(&t).unwrap().to_bits(), q.npoint_log_interaction(&t).unwrap().to_bits());
            prop_assert!(rbm_gap(&q, &t) < 1e-10);
        } else {
            let shift = q.b[t[0]] - p.b[t[0]];
            let diff = q.npoint_log_interaction(&t).unwrap() - p.npoint_log_interaction(&t).unwrap();
            prop_assert!((diff - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn permutations_give_identical_estimates(seed in any::<u64>(), order in 2usize..=4) {
        let m = random_dataset(6, 3000, seed);
        let mut r = rng(seed);
        let mut vars: Vec<usize> = (0..6).collect();
        for i in (1..6).rev() {
            vars.swap(i, r.random_range(0..=i));
        }
        let (t, rest) = vars.split_at(order);
        let cond: Vec<usize> = rest.iter().copied().take(r.random_range(0..=rest.len())).collect();
        prop_assert!(permutation_exact(&m, t, &cond));
    }

    #[test]
    fn log_of_multiplicative_is_additive_on_log_p(seed in any::<u64>(), n_vars in 2usize..=7) {
        let mut r = rng(seed);
        let lw = random_log_weights(n_vars, &mut r);
        let d = ExactDistribution::from_log_weights(n_vars, &lw).unwrap();
        let p = normalise(&lw);
        let logp = |s: usize| p[s].ln();
        let (m, w) = d.weighted_samples(Some(&logp)).unwrap();
        let view = DataView::weighted(&m, &w).unwrap();
        let (t, _) = random_tuple(n_vars, 4, &mut r);
        let rest: Vec<usize> = (0..n_vars).filter(|v| !t.contains(v)).collect();
        let reference = Assignment::new(rest.iter().map(|&v| (v, r.random_range(0..2u8))).collect()).unwrap();
        let spec = TargetSpec::new(t).with_conditioning(rest).with_reference(reference);
        let lm = multiplicative_interaction(&view, &spec, &exact_cfg()).unwrap().log_value.unwrap();
        let ia = additive_interaction(&view, n_vars, &spec, &exact_cfg()).unwrap().value;
        prop_assert!(rel_err(lm, ia) < 1e-10, "{lm} vs {ia}");
    }

    #[test]
    fn three_point_is_change_in_two_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let lw = random_log_weights(4, &mut r);
        let ytab: Vec<f64> = (0..16).map(|_| r.random_range(-5.0..5.0)).collect();
        let d = ExactDistribution::from_log_weights(4, &lw).unwrap();
        let y = |s: usize| ytab[s];
        let (m, w) = d.weighted_samples(Some(&y)).unwrap();
        let view = DataView::weighted(&m, &w).unwrap();
        let cfg = exact_cfg();
        let three = additive_interaction(&view, 4, &TargetSpec::new([0, 1, 2]).with_conditioning([3]), &cfg).unwrap().value;
        for (a, b, c) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let at = |v: u8| {
                let spec = TargetSpec::new([a, b])
                    .with_conditioning([c, 3])
                    .with_reference(Assignment::new(vec![(c, v), (3, 0)]).unwrap());
                additive_interaction(&view, 4, &spec, &cfg).unwrap().value
            };
            prop_assert!((three - (at(1) - at(0))).abs() < 1e-10);
        }
    }

    #[test]
    fn independent_blocks_do_not_interact(seed in any::<u64>()) {
        // two independent blocks {0,1,2} and {3,4}
        let mut r = rng(seed);
        let a = random_log_weights(3, &mut r);
        let b = random_log_weights(2, &mut r);
        let lw: Vec<f64> = (0..32).map(|s| a[s & 7] + b[s >> 3]).collect();
        let d = ExactDistribution::from_log_weights(5, &lw).unwrap();
        let (m, w) = d.weighted_samples(None).unwrap();
        let view = DataView::weighted(&m, &w).unwrap();
        for t in [vec![0, 3], vec![2, 4], vec![1, 2, 3], vec![0, 1, 3, 4]] {
            let est = multiplicative_interaction(&view, &TargetSpec::new(t.clone()), &exact_cfg()).unwrap();
            prop_assert!((est.value - 1.0).abs() < 1e-10, "{t:?}: {}", est.value);
        }
    }

    #[test]
    fn categorical_transitivity_and_sign_rules(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tab: Vec<f64> = (0..12).map(|_| r.random_range(-4.0..4.0)).collect();
        let f = |a: u8, b: u8, c: u8| tab[(a as usize * 2 + b as usize) * 2 + c as usize];
        let (m, w) = categorical_table(&f, seed);
        for wv in [0u8, 1] {
            let oracle = |t1: (u8, u8), t2: (u8, u8)| {
                (f(t1.1, t2.1, wv) - f(t1.0, t2.1, wv)) - (f(t1.1, t2.0, wv) - f(t1.0, t2.0, wv))
            };
            let i = |t1, t2| categorical_ia(&m, &w, 0, t1, t2, wv);
            for (t1, t2) in [((0, 1), (0, 1)), ((1, 2), (0, 1)), ((0, 2), (1, 0)), ((2, 0), (0, 1))] {
                prop_assert!((i(t1, t2) - oracle(t1, t2)).abs() < 1e-10);
            }
            prop_assert!((i((0, 1), (0, 1)) + i((1, 2), (0, 1)) - i((0, 2), (0, 1))).abs() < 1e-10);
            prop_assert!((i((0, 1), (0, 1)) + i((1, 0), (0, 1))).abs() < 1e-10);
            prop_assert!((i((0, 1), (0, 1)) - i((1, 0), (1, 0))).abs() < 1e-10);
            prop_assert!((i((0, 2), (0, 1)) - categorical_ia(&m, &w, 1, (0, 2), (0, 1), wv)).abs() < 1e-10);
        }
    }

    #[test]
    fn categorical_linearity(seed in any::<u64>(), slope in -3.0f64..3.0) {
        // the T2 effect grows linearly in the T1 label
        let mut r = rng(seed);
        let base: Vec<f64> = (0..12).map(|_| r.random_range(-4.0..4.0)).collect();
        let f = |a: u8, b: u8, c: u8| {
            let shared = base[(b as usize) * 2 + c as usize] + base[4 + (a as usize) * 2 + c as usize];
            shared + slope * a as f64 * b as f64
        };
        let (m, w) = categorical_table(&f, seed);
        let i01 = categorical_ia(&m, &w, 0, (0, 1), (0, 1), 0);
        let i12 = categorical_ia(&m, &w, 0, (1, 2), (0, 1), 0);
        let i02 = categorical_ia(&m, &w, 0, (0, 2), (0, 1), 0);
        prop_assert!((i01 - i12).abs() < 1e-10);
        prop_assert!((i02 - 2.0 * i01).abs() < 1e-10);
        prop_assert!((i01 - slope).abs() < 1e-10);
    }

    #[test]
    fn counts_shrink_under_extra_conditions(seed in any::<u64>()) {
        let m = random_dataset(5, 500, seed);
        let mut r = rng(seed);
        let a = Assignment::new(vec![(0, r.random_range(0..2u8)), (1, r.random_range(0..2u8))]).unwrap();
        let base = m.count_assignment(&a);
        let split: u64 = (0..2).map(|v| m.count_assignment(&a.extended(&[(2, v)]).unwrap())).sum();
        prop_assert_eq!(split, base);
        prop_assert!(m.count_assignment(&a.extended(&[(3, 1)]).unwrap()) <= base);
        prop_assert_eq!(m.count_assignment(&Assignment::empty()), 500);
    }

    #[test]
    fn bin_report_sums_to_conditioning_count(seed in any::<u64>(), order in 1usize..=3) {
        let m = random_dataset(6, 800, seed);
        let targets: Vec<usize> = (0..order).collect();
        let cond: Vec<usize> = (order..5).collect();
        let spec = TargetSpec::new(targets).with_conditioning(cond.clone());
        let rows = bin_report(&m, &spec, 10.0).unwrap();
        prop_assert_eq!(rows.len(), 1 << order);
        let total: f64 = rows.iter().map(|r| r.count).sum();
        prop_assert_eq!(total as u64, m.count_assignment(&Assignment::zeros(&cond)));
        prop_assert!(rows.iter().all(|r| r.low == (r.count < 10.0)));
    }

    #[test]
    fn packed_round_trip(seed in any::<u64>(), n in 1usize..300) {
        let m = random_dataset(4, n, seed);
        let back = packed::from_bytes(&packed::to_bytes(&m)).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn ising_is_markov_in_its_neighbours() {
    for side in [3, 4] {
        let lw = ising_log_weights(side, 0.5, 2.0);
        let gap = markov_gap(&lw, side * side, &ising_neighbours(side));
        assert!(gap < 1e-12, "L={side}: {gap:e}");
    }
}

#[test]
fn plaquette_model_needs_its_wider_blanket() {
    let side = 4;
    let lw = plaquette_log_weights(side, 0.6, 1.0);
    assert!(markov_gap(&lw, 16, &plaquette_neighbours(side)) < 1e-12);
    // four nearest neighbours are not enough once 4-body terms exist
    assert!(markov_gap(&lw, 16, &ising_neighbours(side)) > 1e-3);
}

#[test]
fn sampler_matches_enumeration_on_two_by_two() {
    let cfg = HamiltonianConfig::ising(2, 2.5);
    let out = metropolis(&cfg, &SamplerConfig::new(40_000, 11)).unwrap();
    let p = normalise(&ising_log_weights(2, 0.5, 2.5));
    let mut counts = [0f64; 16];
    for row in 0..out.matrix.n_samples() {
        let s: usize = (0..4).map(|k| (out.matrix.value(k, row) as usize) << k).sum();
        counts[s] += 1.0;
    }
    let n = out.matrix.n_samples() as f64;
    let chi2: f64 = counts.iter().zip(&p).map(|(o, q)| (o - n * q).powi(2) / (n * q)).sum();
    // 15 dof; the 0.999 quantile is about 37.7
    assert!(chi2 < 37.7, "chi2 = {chi2}");
}

#[test]
fn estimates_are_deterministic_in_the_seed() {
    let cfg = HamiltonianConfig::ising(4, 2.4);
    let a = metropolis(&cfg, &SamplerConfig::new(2000, 5)).unwrap().matrix;
    let b = metropolis(&cfg, &SamplerConfig::new(2000, 5)).unwrap().matrix;
    assert_eq!(packed::to_bytes(&a), packed::to_bytes(&b));
    let c = metropolis(&cfg, &SamplerConfig::new(2000, 6)).unwrap().matrix;
    assert_ne!(packed::to_bytes(&a), packed::to_bytes(&c));
    let spec = TargetSpec::new([0, 1]).with_conditioning([2, 3]);
    let e1 = multiplicative_interaction(&DataView::new(&a), &spec, &EstimatorConfig::flagging(1.0)).unwrap();
    let e2 = multiplicative_interaction(&DataView::new(&b), &spec, &EstimatorConfig::flagging(1.0)).unwrap();
    assert_eq!(e1, e2);
}
