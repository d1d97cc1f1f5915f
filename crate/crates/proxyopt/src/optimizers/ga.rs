//! Real-coded genetic algorithm: tournament selection, BLX-alpha blend
//! crossover, per-gene Gaussian mutation, elitism, box clamping.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{clamp_to_bounds, Landscape, OptResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` defaults to 1/d.
    pub mutation_prob: Option<f64>,
    pub mutation_sigma_frac: f64,
    pub blx_alpha: f64,
    pub elitism_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 200,
            tournament_size: 3,
            crossover_prob: 0.9,
            mutation_prob: None,
            mutation_sigma_frac: 0.1,
            blx_alpha: 0.5,
            elitism_count: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter {
                name: "population_size",
                reason: "must be >= 2".to_string(),
            });
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::InvalidParameter {
                name: "tournament_size",
                reason: format!(
                    "must be in 1..={}, got {}",
                    self.population_size, self.tournament_size
                ),
            });
        }
        if self.elitism_count >= self.population_size {
            return Err(Error::InvalidParameter {
                name: "elitism_count",
                reason: "must be smaller than the population".to_string(),
            });
        }
        for (name, p) in [("crossover_prob", self.crossover_prob)]
            .into_iter()
            .chain(self.mutation_prob.map(|p| ("mutation_prob", p)))
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name: "ga probability",
                    reason: format!("{name} must be in [0,1], got {p}"),
                });
            }
        }
        Ok(())
    }
}

fn tournament(
    values: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let mut best = rng.gen_range(0..values.len());
    for _ in 1..k {
        let challenger = rng.gen_range(0..values.len());
        if values[challenger] < values[best] {
            best = challenger;
        }
    }
    best
}

fn blx_crossover(
    p1: &[f64],
    p2: &[f64],
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (&a, &b) in p1.iter().zip(p2) {
        let (lo, hi) = (a.min(b), a.max(b));
        let spread = hi - lo;
        let (lo, hi) = (lo - alpha * spread, hi + alpha * spread);
        if spread == 0.0 {
            c1.push(a);
            c2.push(a);
        } else {
            c1.push(rng.gen_range(lo..=hi));
            c2.push(rng.gen_range(lo..=hi));
        }
    }
    (c1, c2)
}

/// Full GA run minimizing `objective` over its box domain.
pub fn ga_run<L: Landscape>(config: &GaConfig, objective: &L) -> Result<OptResult> {
    config.validate()?;
    let (lower, upper) = objective.bounds();
    let d = lower.len();
    let mutation_prob = config.mutation_prob.unwrap_or(1.0 / d as f64);
    let mutation_dists: Vec<Normal<f64>> = (0..d)
        .map(|i| Normal::new(0.0, config.mutation_sigma_frac * (upper[i] - lower[i])).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population: Vec<Vec<f64>> = (0..config.population_size)
        .map(|_| (0..d).map(|i| rng.gen_range(lower[i]..=upper[i])).collect())
        .collect();
    let mut values = Vec::with_capacity(population.len());
    for ind in &population {
        values.push(objective.evaluate(ind)?);
    }
    let mut evaluations = population.len() as u64;

    let (mut best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let mut best_point = population[best_idx].clone();
    let mut best_value = values[best_idx];
    let mut trajectory = Vec::with_capacity(config.generations + 1);
    trajectory.push(best_value);

    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(config.elitism_count)
            .map(|&i| population[i].clone())
            .collect();

        while next.len() < config.population_size {
            let i = tournament(&values, config.tournament_size, &mut rng);
            let j = tournament(&values, config.tournament_size, &mut rng);
            let (mut c1, mut c2) = if rng.gen::<f64>() < config.crossover_prob {
                blx_crossover(&population[i], &population[j], config.blx_alpha, &mut rng)
            } else {
                (population[i].clone(), population[j].clone())
            };
            for child in [&mut c1, &mut c2] {
                for k in 0..d {
                    if rng.gen::<f64>() < mutation_prob {
                        child[k] += mutation_dists[k].sample(&mut rng);
                    }
                }
                clamp_to_bounds(child, lower, upper);
            }
            next.push(c1);
            if next.len() < config.population_size {
                next.push(c2);
            }
        }

        population = next;
        values.clear();
        for ind in &population {
            values.push(objective.evaluate(ind)?);
        }
        evaluations += population.len() as u64;

        let (gen_best, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        best_idx = gen_best;
        if values[best_idx] < best_value {
            best_value = values[best_idx];
            best_point = population[best_idx].clone();
        }
        trajectory.push(best_value);
    }

    Ok(OptResult {
        best_point,
        best_value,
        trajectory,
        evaluations,
        seed: config.seed,
    })
}
