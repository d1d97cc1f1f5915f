//! Training-set generation for proxy construction: dense and sparse uniform
//! coverage and Gaussian sampling around the known global minimum.

mod sobol;

use std::io::{BufRead, Write};

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::fmt_f64;

pub use sobol::SobolSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SamplingScheme {
    Dense,
    Sparse,
    Gaussian,
}

impl SamplingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingScheme::Dense => "dense",
            SamplingScheme::Sparse => "sparse",
            SamplingScheme::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for SamplingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" => Ok(SamplingScheme::Dense),
            "sparse" => Ok(SamplingScheme::Sparse),
            "gaussian" => Ok(SamplingScheme::Gaussian),
            other => Err(Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme `{other}`"),
            }),
        }
    }
}

/// Labeled training data for one proxy model.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub inputs: Array2<f64>,
    pub targets: Vec<f64>,
    pub scheme: SamplingScheme,
    pub spec: BenchmarkSpec,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Write as CSV with header `x0,...,x{d-1},f`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim();
        let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        header.push("f".to_string());
        writeln!(w, "{}", header.join(","))
            .map_err(|e| Error::io("writing sample CSV header", e))?;
        for (row, &t) in self.inputs.rows().into_iter().zip(&self.targets) {
            let mut fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            fields.push(fmt_f64(t));
            writeln!(w, "{}", fields.join(","))
                .map_err(|e| Error::io("writing sample CSV row", e))?;
        }
        Ok(())
    }

    /// Parse the CSV written by `write_csv`. Errors carry the 1-based line.
    pub fn read_csv<R: BufRead>(
        r: R,
        scheme: SamplingScheme,
        spec: BenchmarkSpec,
        seed: u64,
    ) -> Result<SampleSet> {
        let mut rows: Vec<f64> = Vec::new();
        let mut targets = Vec::new();
        let mut dim = None;
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("reading sample CSV", e))?;
            if i == 0 {
                continue; // header
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: "expected at least two fields".to_string(),
                });
            }
            let d = fields.len() - 1;
            if *dim.get_or_insert(d) != d {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: "inconsistent column count".to_string(),
                });
            }
            let mut vals = Vec::with_capacity(fields.len());
            for f in &fields {
                vals.push(f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                })?);
            }
            targets.push(vals.pop().unwrap());
            rows.extend(vals);
        }
        let d = dim.ok_or_else(|| Error::Parse {
            line: 1,
            reason: "no data rows".to_string(),
        })?;
        let n = targets.len();
        let inputs = Array2::from_shape_vec((n, d), rows)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Ok(SampleSet {
            inputs,
            targets,
            scheme,
            spec,
            seed,
        })
    }
}

/// Uniform-coverage sampling at full budget: an axis-aligned grid for d=2,
/// a Sobol fill of exactly `n` points for higher dimensions.
pub fn sample_dense(spec: &BenchmarkSpec, n: usize) -> Result<SampleSet> {
    uniform_set(spec, n, SamplingScheme::Dense)
}

/// Same construction as dense, at a quarter of the dense budget.
pub fn sample_sparse(spec: &BenchmarkSpec, n_dense: usize) -> Result<SampleSet> {
    let n = (0.25 * n_dense as f64).round() as usize;
    uniform_set(spec, n, SamplingScheme::Sparse)
}

fn uniform_set(spec: &BenchmarkSpec, n: usize, scheme: SamplingScheme) -> Result<SampleSet> {
    let d = spec.dim;
    if n == 0 {
        return Err(Error::InsufficientSamples { n, dim: d });
    }
    let inputs = if d <= 2 {
        grid_points(spec, n)?
    } else {
        sobol_points(spec, n)?
    };
    let targets = label_samples(spec, &inputs)?;
    Ok(SampleSet {
        inputs,
        targets,
        scheme,
        spec: spec.clone(),
        seed: 0,
    })
}

fn grid_points(spec: &BenchmarkSpec, n: usize) -> Result<Array2<f64>> {
    let d = spec.dim;
    let per_axis = (n as f64).powf(1.0 / d as f64).floor() as usize;
    if per_axis == 0 {
        return Err(Error::InsufficientSamples { n, dim: d });
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            if per_axis == 1 {
                vec![0.5 * (spec.lower[i] + spec.upper[i])]
            } else {
                let step = spec.range(i) / (per_axis - 1) as f64;
                (0..per_axis)
                    .map(|k| spec.lower[i] + k as f64 * step)
                    .collect()
            }
        })
        .collect();
    let total = per_axis.pow(d as u32);
    let mut out = Array2::zeros((total, d));
    for row in 0..total {
        let mut idx = row;
        for axis in (0..d).rev() {
            out[[row, axis]] = axes[axis][idx % per_axis];
            idx /= per_axis;
        }
    }
    Ok(out)
}

fn sobol_points(spec: &BenchmarkSpec, n: usize) -> Result<Array2<f64>> {
    let d = spec.dim;
    let mut seq = SobolSequence::new(d).ok_or(Error::InvalidParameter {
        name: "dim",
        reason: format!("Sobol fill supports up to 10 dimensions, got {d}"),
    })?;
    let mut out = Array2::zeros((n, d));
    for row in 0..n {
        let p = seq.next_point();
        for axis in 0..d {
            out[[row, axis]] = spec.lower[axis] + p[axis] * spec.range(axis);
        }
    }
    Ok(out)
}

/// `n` i.i.d. draws from an axis-aligned Gaussian centered on the global
/// minimizer, per-axis std `sigma_frac * range`. Out-of-domain draws are
/// rejected and redrawn.
pub fn sample_gaussian(
    spec: &BenchmarkSpec,
    n: usize,
    sigma_frac: f64,
    seed: u64,
) -> Result<SampleSet> {
    if !(sigma_frac > 0.0 && sigma_frac <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_frac",
            reason: format!("must be in (0, 1], got {sigma_frac}"),
        });
    }
    if n == 0 {
        return Err(Error::InsufficientSamples { n, dim: spec.dim });
    }
    let d = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals: Vec<Normal<f64>> = (0..d)
        .map(|i| Normal::new(spec.global_min_point[i], sigma_frac * spec.range(i)).unwrap())
        .collect();
    let mut out = Array2::zeros((n, d));
    let mut point = vec![0.0; d];
    for row in 0..n {
        loop {
            for (axis, dist) in normals.iter().enumerate() {
                point[axis] = dist.sample(&mut rng);
            }
            if spec.contains(&point) {
                break;
            }
        }
        for axis in 0..d {
            out[[row, axis]] = point[axis];
        }
    }
    let targets = label_samples(spec, &out)?;
    Ok(SampleSet {
        inputs: out,
        targets,
        scheme: SamplingScheme::Gaussian,
        spec: spec.clone(),
        seed,
    })
}

/// Exact ground-truth labels for every row of `inputs`.
pub fn label_samples(spec: &BenchmarkSpec, inputs: &Array2<f64>) -> Result<Vec<f64>> {
    let mut targets = Vec::with_capacity(inputs.nrows());
    for (i, row) in inputs.rows().into_iter().enumerate() {
        let x = row.as_slice().unwrap();
        if !spec.contains(x) {
            return Err(Error::OutOfDomain { row: i });
        }
        targets.push(spec.evaluate(x)?);
    }
    Ok(targets)
}

/// Generate a sample set for `scheme` with the shared entry point used by the
/// harness and CLI. `n` is always the dense budget; sparse derives its 25%
/// count internally.
pub fn sample(
    spec: &BenchmarkSpec,
    scheme: SamplingScheme,
    n_dense: usize,
    sigma_frac: f64,
    seed: u64,
) -> Result<SampleSet> {
    match scheme {
        SamplingScheme::Dense => sample_dense(spec, n_dense),
        SamplingScheme::Sparse => sample_sparse(spec, n_dense),
        SamplingScheme::Gaussian => sample_gaussian(spec, n_dense, sigma_frac, seed),
    }
}
