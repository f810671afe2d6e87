use std::sync::atomic::{AtomicBool, Ordering};

use flexbound::evolve::{self, GaConfig};
use proptest::prelude::*;

fn sphere(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum()
}

fn rosenbrock(g: &[f64]) -> f64 {
    (1.0 - g[0]).powi(2) + 100.0 * (g[1] - g[0] * g[0]).powi(2)
}

#[test]
fn sphere_converges_for_ten_seeds() {
    for seed in 0..10 {
        let cfg = GaConfig { seed, ..GaConfig::default() }.with_bounds(vec![(-5.0, 5.0); 4]);
        let r = evolve::run(sphere, &cfg).unwrap();
        assert!(r.best_fitness <= 1e-2, "seed {seed}: {}", r.best_fitness);
        assert_eq!(r.trace.len(), cfg.generations);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn rosenbrock_maximization_reaches_zero() {
    for seed in 0..5 {
        let cfg = GaConfig { population_size: 100, generations: 500, seed, ..GaConfig::default() }
            .with_bounds(vec![(-2.0, 2.0); 2]);
        let r = evolve::maximize(|g| -rosenbrock(g), &cfg).unwrap();
        assert!(r.best_fitness > -0.1, "seed {seed}: {}", r.best_fitness);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn every_evaluated_genome_is_inside_the_box() {
    let bounds = vec![(-1.0, 2.0), (10.0, 10.5), (-3.0, -2.0)];
    let escaped = AtomicBool::new(false);
    let cfg = GaConfig { mutation_sigma: 2.0, mutation_rate: 0.9, seed: 8, ..GaConfig::default() }.with_bounds(bounds.clone());
    evolve::run(
        |g| {
            if g.iter().zip(&bounds).any(|(x, &(lo, hi))| *x < lo || *x > hi) {
                escaped.store(true, Ordering::Relaxed);
            }
            sphere(g)
        },
        &cfg,
    )
    .unwrap();
    assert!(!escaped.load(Ordering::Relaxed));
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = GaConfig { seed: 77, ..GaConfig::default() }.with_bounds(vec![(-5.0, 5.0); 3]);
    assert_eq!(evolve::run(rosenbrock, &cfg).unwrap(), evolve::run(rosenbrock, &cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn elitism_keeps_generation_best_monotone(seed in any::<u64>(), elites in 1usize..5, genes in 1usize..5) {
        let cfg = GaConfig { generations: 40, population_size: 20, elitism_count: elites, seed, ..GaConfig::default() }
            .with_bounds(vec![(-3.0, 3.0); genes]);
        let r = evolve::run(|g| g.iter().map(|x| (3.0 * x).sin() + x * x).sum(), &cfg).unwrap();
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(r.best_fitness, *r.trace.last().unwrap());
    }

    #[test]
    fn concurrent_evaluation_is_order_independent(seed in any::<u64>()) {
        let seq = GaConfig { generations: 30, seed, ..GaConfig::default() }.with_bounds(vec![(-2.0, 2.0); 3]);
        let par = GaConfig { parallel: true, ..seq.clone() };
        prop_assert_eq!(evolve::run(rosenbrock, &seq).unwrap(), evolve::run(rosenbrock, &par).unwrap());
    }
}
