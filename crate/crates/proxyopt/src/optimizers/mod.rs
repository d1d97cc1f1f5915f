//! Derivative-free optimizers (PSO and GA) over a uniform objective
//! interface that hides whether the landscape is the true function or a
//! trained proxy.

mod ga;
mod pso;

use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::neuralnet::MlpModel;

pub use ga::{ga_run, GaConfig};
pub use pso::{pso_run, pso_step, PsoConfig, PsoState};

/// Anything an optimizer can minimize over a box domain.
pub trait Landscape {
    fn evaluate(&self, x: &[f64]) -> Result<f64>;
    fn bounds(&self) -> (&[f64], &[f64]);

    fn dim(&self) -> usize {
        self.bounds().0.len()
    }
}

/// The true benchmark function or its NN-proxy, behind one interface.
#[derive(Debug, Clone)]
pub enum Objective {
    TrueFunction(BenchmarkSpec),
    Proxy(MlpModel, BenchmarkSpec),
}

impl Objective {
    pub fn spec(&self) -> &BenchmarkSpec {
        match self {
            Objective::TrueFunction(s) | Objective::Proxy(_, s) => s,
        }
    }
}

impl Landscape for Objective {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let spec = self.spec();
        if !spec.contains(x) {
            return Err(Error::OutOfDomain { row: 0 });
        }
        match self {
            Objective::TrueFunction(s) => s.evaluate(x),
            Objective::Proxy(model, _) => model.forward(x),
        }
    }

    fn bounds(&self) -> (&[f64], &[f64]) {
        let spec = self.spec();
        (&spec.lower, &spec.upper)
    }
}

/// One optimizer run: best point found, its value, and the best-so-far value
/// after each iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub trajectory: Vec<f64>,
    pub evaluations: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    Pso,
    Ga,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 2] = [OptimizerKind::Pso, OptimizerKind::Ga];

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Pso => "pso",
            OptimizerKind::Ga => "ga",
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" | "ps" => Ok(OptimizerKind::Pso),
            "ga" => Ok(OptimizerKind::Ga),
            other => Err(Error::InvalidParameter {
                name: "optimizer",
                reason: format!("unknown optimizer `{other}`"),
            }),
        }
    }
}

pub(crate) fn clamp_to_bounds(x: &mut [f64], lower: &[f64], upper: &[f64]) -> Vec<bool> {
    let mut clamped = vec![false; x.len()];
    for i in 0..x.len() {
        if x[i] < lower[i] {
            x[i] = lower[i];
            clamped[i] = true;
        } else if x[i] > upper[i] {
            x[i] = upper[i];
            clamped[i] = true;
        }
    }
    clamped
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_spec, BenchmarkFn};
    use crate::neuralnet::build_mlp;

    #[test]
    fn true_function_evaluate() {
        let obj = Objective::TrueFunction(make_spec(BenchmarkFn::Ackley, 2).unwrap());
        assert!(obj.evaluate(&[0.0, 0.0]).unwrap().abs() < 1e-12);

        let obj = Objective::TrueFunction(make_spec(BenchmarkFn::Rosenbrock, 2).unwrap());
        assert!((obj.evaluate(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_proxy_is_constant() {
        let spec = make_spec(BenchmarkFn::Rastrigin, 2).unwrap();
        let mut model = build_mlp(&[2, 4, 1], 0).unwrap();
        for w in &mut model.weights {
            w.fill(0.0);
        }
        model.norm.target_mean = 3.25;
        let obj = Objective::Proxy(model, spec);
        assert_eq!(obj.evaluate(&[1.0, -2.0]).unwrap(), 3.25);
        assert_eq!(obj.evaluate(&[0.0, 0.0]).unwrap(), 3.25);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let obj = Objective::TrueFunction(make_spec(BenchmarkFn::Rastrigin, 2).unwrap());
        assert!(matches!(
            obj.evaluate(&[6.0, 0.0]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn clamp_reports_axes() {
        let mut x = vec![-3.0, 0.5, 9.0];
        let hit = clamp_to_bounds(&mut x, &[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0]);
        assert_eq!(x, vec![-1.0, 0.5, 1.0]);
        assert_eq!(hit, vec![true, false, true]);
    }
}
