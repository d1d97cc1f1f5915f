//! The three classical test functions (Rosenbrock, Rastrigin, Ackley), their
//! evaluation domains and known global minima. These are the ground truth the
//! rest of the pipeline is measured against.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkFn {
    Rosenbrock,
    Rastrigin,
    Ackley,
}

impl BenchmarkFn {
    pub const ALL: [BenchmarkFn; 3] = [
        BenchmarkFn::Rosenbrock,
        BenchmarkFn::Rastrigin,
        BenchmarkFn::Ackley,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkFn::Rosenbrock => "rosenbrock",
            BenchmarkFn::Rastrigin => "rastrigin",
            BenchmarkFn::Ackley => "ackley",
        }
    }

    /// Half-width of the function's hypercube domain.
    pub fn domain_halfwidth(&self) -> f64 {
        match self {
            BenchmarkFn::Rosenbrock => 2.048,
            BenchmarkFn::Rastrigin => 5.12,
            BenchmarkFn::Ackley => 32.768,
        }
    }
}

impl fmt::Display for BenchmarkFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rosenbrock" => Ok(BenchmarkFn::Rosenbrock),
            "rastrigin" => Ok(BenchmarkFn::Rastrigin),
            "ackley" => Ok(BenchmarkFn::Ackley),
            other => Err(Error::UnknownBenchmark(other.to_string())),
        }
    }
}

/// A test function pinned to a concrete dimension and box domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: BenchmarkFn,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub global_min_point: Vec<f64>,
    pub global_min_value: f64,
}

impl BenchmarkSpec {
    /// Evaluate the true function at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        match self.name {
            BenchmarkFn::Rosenbrock => eval_rosenbrock(x),
            BenchmarkFn::Rastrigin => eval_rastrigin(x),
            BenchmarkFn::Ackley => eval_ackley(x),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| xi >= lo && xi <= hi)
    }

    pub fn range(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }
}

pub fn eval_rosenbrock(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidDimension {
            dim: x.len(),
            context: "rosenbrock (needs d >= 2)",
        });
    }
    let mut sum = 0.0;
    for w in x.windows(2) {
        let (a, b) = (w[0], w[1]);
        sum += 100.0 * (b - a * a).powi(2) + (a - 1.0).powi(2);
    }
    Ok(sum)
}

pub fn eval_rastrigin(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidDimension {
            dim: 0,
            context: "rastrigin",
        });
    }
    let d = x.len() as f64;
    let sum: f64 = x
        .iter()
        .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
        .sum();
    Ok(10.0 * d + sum)
}

pub fn eval_ackley(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidDimension {
            dim: 0,
            context: "ackley",
        });
    }
    let d = x.len() as f64;
    let sq_mean = x.iter().map(|&xi| xi * xi).sum::<f64>() / d;
    let cos_mean = x.iter().map(|&xi| (2.0 * PI * xi).cos()).sum::<f64>() / d;
    Ok(-20.0 * (-0.2 * sq_mean.sqrt()).exp() - cos_mean.exp() + 20.0 + E)
}

/// Build the spec for `name` in dimension `dim` with the standard bounds and
/// known minimizer.
pub fn make_spec(name: BenchmarkFn, dim: usize) -> Result<BenchmarkSpec> {
    let min_dim = match name {
        BenchmarkFn::Rosenbrock => 2,
        _ => 1,
    };
    if dim < min_dim {
        return Err(Error::InvalidDimension {
            dim,
            context: "make_spec",
        });
    }
    let hw = name.domain_halfwidth();
    let minimizer = match name {
        BenchmarkFn::Rosenbrock => vec![1.0; dim],
        BenchmarkFn::Rastrigin | BenchmarkFn::Ackley => vec![0.0; dim],
    };
    Ok(BenchmarkSpec {
        name,
        dim,
        lower: vec![-hw; dim],
        upper: vec![hw; dim],
        global_min_point: minimizer,
        global_min_value: 0.0,
    })
}
