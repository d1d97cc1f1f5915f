//! Particle swarm optimization with box constraints.
//!
//! Velocity update per particle i:
//!   v <- w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)
//! with r1, r2 fresh uniform draws per particle per step (scalar by default,
//! per-dimension behind `per_dimension_r`).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{clamp_to_bounds, Landscape, OptResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    /// Draw r1/r2 per dimension instead of per particle.
    pub per_dimension_r: bool,
    /// Initial velocity scale as a fraction of the per-axis range.
    pub init_velocity_frac: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 40,
            iterations: 200,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: 0,
            per_dimension_r: false,
            init_velocity_frac: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsoState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub pbest_positions: Vec<Vec<f64>>,
    pub pbest_values: Vec<f64>,
    pub gbest_position: Vec<f64>,
    pub gbest_value: f64,
    pub iteration: usize,
    pub evaluations: u64,
}

impl PsoState {
    pub fn init<L: Landscape>(
        config: &PsoConfig,
        objective: &L,
        rng: &mut ChaCha8Rng,
    ) -> Result<PsoState> {
        let (lower, upper) = objective.bounds();
        let d = lower.len();
        let mut positions = Vec::with_capacity(config.swarm_size);
        let mut velocities = Vec::with_capacity(config.swarm_size);
        for _ in 0..config.swarm_size {
            let x: Vec<f64> = (0..d).map(|i| rng.gen_range(lower[i]..=upper[i])).collect();
            let v: Vec<f64> = (0..d)
                .map(|i| {
                    let vmax = config.init_velocity_frac * (upper[i] - lower[i]);
                    rng.gen_range(-vmax..=vmax)
                })
                .collect();
            positions.push(x);
            velocities.push(v);
        }
        let mut pbest_values = Vec::with_capacity(config.swarm_size);
        for x in &positions {
            pbest_values.push(objective.evaluate(x)?);
        }
        let evaluations = config.swarm_size as u64;
        let (best_idx, &best_val) = pbest_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        Ok(PsoState {
            gbest_position: positions[best_idx].clone(),
            gbest_value: best_val,
            pbest_positions: positions.clone(),
            pbest_values,
            positions,
            velocities,
            iteration: 0,
            evaluations,
        })
    }
}

/// One synchronous swarm update.
pub fn pso_step<L: Landscape>(
    state: &mut PsoState,
    config: &PsoConfig,
    objective: &L,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let (lower, upper) = objective.bounds();
    let d = lower.len();
    for i in 0..state.positions.len() {
        let (r1s, r2s) = (rng.gen::<f64>(), rng.gen::<f64>());
        for k in 0..d {
            let (r1, r2) = if config.per_dimension_r {
                (rng.gen::<f64>(), rng.gen::<f64>())
            } else {
                (r1s, r2s)
            };
            let x = state.positions[i][k];
            state.velocities[i][k] = config.inertia * state.velocities[i][k]
                + config.cognitive * r1 * (state.pbest_positions[i][k] - x)
                + config.social * r2 * (state.gbest_position[k] - x);
            state.positions[i][k] += state.velocities[i][k];
        }
        let hit = clamp_to_bounds(&mut state.positions[i], lower, upper);
        // Zero the velocity on clamped axes so particles do not stick to walls.
        for (k, &was_clamped) in hit.iter().enumerate() {
            if was_clamped {
                state.velocities[i][k] = 0.0;
            }
        }
        let value = objective.evaluate(&state.positions[i])?;
        state.evaluations += 1;
        if value < state.pbest_values[i] {
            state.pbest_values[i] = value;
            state.pbest_positions[i] = state.positions[i].clone();
            if value < state.gbest_value {
                state.gbest_value = value;
                state.gbest_position = state.positions[i].clone();
            }
        }
    }
    state.iteration += 1;
    Ok(())
}

/// Full PSO run; returns the global best and its best-so-far trajectory.
pub fn pso_run<L: Landscape>(config: &PsoConfig, objective: &L) -> Result<OptResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = PsoState::init(config, objective, &mut rng)?;
    let mut trajectory = Vec::with_capacity(config.iterations + 1);
    trajectory.push(state.gbest_value);
    for _ in 0..config.iterations {
        pso_step(&mut state, config, objective, &mut rng)?;
        trajectory.push(state.gbest_value);
    }
    Ok(OptResult {
        best_point: state.gbest_position,
        best_value: state.gbest_value,
        trajectory,
        evaluations: state.evaluations,
        seed: config.seed,
    })
}
