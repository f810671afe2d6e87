//! Real-coded genetic algorithm.
//!
//! Minimization is the primitive ([`run`]); [`maximize`] negates the fitness.
//! Each generation keeps the `elitism_count` best genomes, then fills the rest
//! of the population with tournament-selected parents, blend crossover,
//! per-gene Gaussian mutation and clamping to the box.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    /// Number of populations evaluated, the random initial one included.
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_sigma: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
    /// Evaluate each population on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            tournament_size: 3,
            elitism_count: 1,
            bounds: Vec::new(),
            seed: 0,
            parallel: false,
        }
    }
}

impl GaConfig {
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if self.generations == 0 {
            return bad("generations must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("crossover_rate and mutation_rate must lie in [0, 1]".into());
        }
        if !(self.mutation_sigma > 0.0 && self.mutation_sigma.is_finite()) {
            return bad(format!("mutation_sigma must be positive, got {}", self.mutation_sigma));
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be smaller than population_size".into());
        }
        if self.bounds.is_empty() {
            return bad("bounds must describe at least one gene".into());
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("gene {i}: bounds ({lo}, {hi}) need finite low < high"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaReport {
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness of each evaluated population.
    pub trace: Vec<f64>,
}

/// Minimize `fitness` over the box in `cfg.bounds`.
pub fn run<F>(fitness: F, cfg: &GaConfig) -> Result<GaReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    run_with_initial(fitness, cfg, &[])
}

/// Like [`run`], but the first genomes of the initial population are taken
/// from `initial` (clamped to the box); the rest are drawn uniformly.
pub fn run_with_initial<F>(fitness: F, cfg: &GaConfig, initial: &[Vec<f64>]) -> Result<GaReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let genes = cfg.bounds.len();
    if let Some(g) = initial.iter().find(|g| g.len() != genes) {
        return Err(Error::ShapeMismatch {
            context: "initial genome length",
            expected: genes,
            found: g.len(),
        });
    }
    let mut rng = seed::rng(cfg.seed);
    let sigmas: Vec<Normal<f64>> = cfg
        .bounds
        .iter()
        .map(|&(lo, hi)| Normal::new(0.0, cfg.mutation_sigma * (hi - lo)).expect("positive sigma"))
        .collect();

    let mut population: Vec<Vec<f64>> = (0..cfg.population_size)
        .map(|i| match initial.get(i) {
            Some(g) => clamp(g.clone(), &cfg.bounds),
            None => cfg.bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect(),
        })
        .collect();
    let mut scores = evaluate(&fitness, &population, cfg.parallel)?;

    let mut trace = Vec::with_capacity(cfg.generations);
    let mut best = best_index(&scores);
    let mut best_genome = population[best].clone();
    let mut best_fitness = scores[best];
    trace.push(best_fitness);

    for _ in 1..cfg.generations {
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));

        let mut next: Vec<Vec<f64>> = ranked[..cfg.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut next_scores: Vec<f64> = ranked[..cfg.elitism_count].iter().map(|&i| scores[i]).collect();

        let mut children = Vec::with_capacity(cfg.population_size - next.len());
        while next.len() + children.len() < cfg.population_size {
            let p1 = &population[tournament(&mut rng, &scores, cfg.tournament_size)];
            let p2 = &population[tournament(&mut rng, &scores, cfg.tournament_size)];
            let (mut c1, mut c2) = if rng.random_bool(cfg.crossover_rate) {
                blend(&mut rng, p1, p2)
            } else {
                (p1.clone(), p2.clone())
            };
            mutate(&mut rng, &mut c1, &sigmas, cfg.mutation_rate);
            mutate(&mut rng, &mut c2, &sigmas, cfg.mutation_rate);
            children.push(clamp(c1, &cfg.bounds));
            if next.len() + children.len() < cfg.population_size {
                children.push(clamp(c2, &cfg.bounds));
            }
        }
        next_scores.extend(evaluate(&fitness, &children, cfg.parallel)?);
        next.extend(children);
        population = next;
        scores = next_scores;

        best = best_index(&scores);
        if scores[best] < best_fitness {
            best_fitness = scores[best];
            best_genome = population[best].clone();
        }
        trace.push(scores[best]);
    }

    Ok(GaReport {
        best_genome,
        best_fitness,
        trace,
    })
}

/// Maximize `fitness`: runs [`run`] on the negation and reports un-negated values.
pub fn maximize<F>(fitness: F, cfg: &GaConfig) -> Result<GaReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let r = run(|g| -fitness(g), cfg)?;
    Ok(GaReport {
        best_genome: r.best_genome,
        best_fitness: -r.best_fitness,
        trace: r.trace.into_iter().map(|v| -v).collect(),
    })
}

fn evaluate<F>(fitness: &F, genomes: &[Vec<f64>], parallel: bool) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let scores: Vec<f64> = if parallel {
        genomes.par_iter().map(|g| fitness(g)).collect()
    } else {
        genomes.iter().map(|g| fitness(g)).collect()
    };
    match scores.iter().position(|s| !s.is_finite()) {
        Some(i) => Err(Error::NonFiniteFitness {
            genome: genomes[i].clone(),
        }),
        None => Ok(scores),
    }
}

fn best_index(scores: &[f64]) -> usize {
    // first minimum wins ties
    scores
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if *s < scores[best] { i } else { best })
}

fn tournament(rng: &mut Rng, scores: &[f64], size: usize) -> usize {
    let mut winner = rng.random_range(0..scores.len());
    for _ in 1..size {
        let c = rng.random_range(0..scores.len());
        if scores[c] < scores[winner] || (scores[c] == scores[winner] && c < winner) {
            winner = c;
        }
    }
    winner
}

fn blend(rng: &mut Rng, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let alpha: f64 = rng.random();
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (alpha * x + (1.0 - alpha) * y, (1.0 - alpha) * x + alpha * y))
        .unzip()
}

fn mutate(rng: &mut Rng, genome: &mut [f64], sigmas: &[Normal<f64>], rate: f64) {
    for (g, n) in genome.iter_mut().zip(sigmas) {
        if rng.random_bool(rate) {
            *g += n.sample(rng);
        }
    }
}

fn clamp(mut genome: Vec<f64>, bounds: &[(f64, f64)]) -> Vec<f64> {
    for (g, &(lo, hi)) in genome.iter_mut().zip(bounds) {
        *g = g.clamp(lo, hi);
    }
    genome
}
