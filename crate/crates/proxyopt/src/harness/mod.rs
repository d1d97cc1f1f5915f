//! Experiment orchestration: seed derivation, proxy construction, the full
//! function x landscape x optimizer grid, and distance aggregation.

mod export;
mod figure;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

use crate::benchmarks::{make_spec, BenchmarkFn, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::neuralnet::{build_mlp, default_architecture, train, MlpModel, TrainConfig};
use crate::optimizers::{ga_run, pso_run, GaConfig, Objective, OptResult, OptimizerKind, PsoConfig};
use crate::sampling::{sample, SamplingScheme};

pub use export::{write_manifest, write_summary_csv, write_trials_csv, RunManifest};
pub use figure::{export_figure_data, FigureData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LandscapeKind {
    GroundTruth,
    Dense,
    Sparse,
    Gaussian,
}

impl LandscapeKind {
    pub const ALL: [LandscapeKind; 4] = [
        LandscapeKind::GroundTruth,
        LandscapeKind::Dense,
        LandscapeKind::Sparse,
        LandscapeKind::Gaussian,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LandscapeKind::GroundTruth => "ground-truth",
            LandscapeKind::Dense => "dense",
            LandscapeKind::Sparse => "sparse",
            LandscapeKind::Gaussian => "gaussian",
        }
    }

    pub fn scheme(&self) -> Option<SamplingScheme> {
        match self {
            LandscapeKind::GroundTruth => None,
            LandscapeKind::Dense => Some(SamplingScheme::Dense),
            LandscapeKind::Sparse => Some(SamplingScheme::Sparse),
            LandscapeKind::Gaussian => Some(SamplingScheme::Gaussian),
        }
    }

    fn index(&self) -> u64 {
        LandscapeKind::ALL.iter().position(|l| l == self).unwrap() as u64
    }
}

impl std::fmt::Display for LandscapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LandscapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ground-truth" | "groundtruth" | "true" => Ok(LandscapeKind::GroundTruth),
            "dense" => Ok(LandscapeKind::Dense),
            "sparse" => Ok(LandscapeKind::Sparse),
            "gaussian" => Ok(LandscapeKind::Gaussian),
            other => Err(Error::InvalidParameter {
                name: "landscape",
                reason: format!("unknown landscape `{other}`"),
            }),
        }
    }
}

/// Counter-based seed split: one master seed expands into independent
/// sampling/training/optimizer streams per grid cell.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = master ^ 0x9e3779b97f4a7c15;
    for &p in parts {
        h ^= p.wrapping_add(0x9e3779b97f4a7c15);
        // splitmix64 finalizer as the mixing round
        h = (h ^ (h >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94d049bb133111eb);
        h ^= h >> 31;
    }
    h
}

const STREAM_SAMPLING: u64 = 0;
const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_OPTIMIZER: u64 = 3;

fn function_index(f: BenchmarkFn) -> u64 {
    BenchmarkFn::ALL.iter().position(|&g| g == f).unwrap() as u64
}

/// Training knobs that may override the built-in architecture defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainSettings {
    pub layers: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
}

impl TrainSettings {
    /// Resolve against the (function, dim) defaults.
    pub fn resolve(&self, function: BenchmarkFn, dim: usize) -> (Vec<usize>, TrainConfig) {
        let (default_layers, default_epochs) = default_architecture(function, dim);
        let layers = self.layers.clone().unwrap_or(default_layers);
        let config = TrainConfig {
            epochs: self.epochs.unwrap_or(default_epochs),
            batch_size: self.batch_size.unwrap_or(64),
            learning_rate: self.learning_rate.unwrap_or(1e-3),
            seed: 0,
            shuffle: true,
        };
        (layers, config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub function: BenchmarkFn,
    pub dim: usize,
    pub landscape: LandscapeKind,
    pub optimizer: OptimizerKind,
    pub n_seeds: usize,
    pub n_samples: usize,
    pub sigma_frac: f64,
    pub train: TrainSettings,
    pub pso: PsoConfig,
    pub ga: GaConfig,
    pub master_seed: u64,
    /// Override the function's default hypercube half-width.
    pub domain_halfwidth: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(
        function: BenchmarkFn,
        dim: usize,
        landscape: LandscapeKind,
        optimizer: OptimizerKind,
    ) -> Self {
        ExperimentConfig {
            function,
            dim,
            landscape,
            optimizer,
            n_seeds: 5,
            n_samples: 10_000,
            sigma_frac: 0.1,
            train: TrainSettings::default(),
            pso: PsoConfig::default(),
            ga: GaConfig::default(),
            master_seed: 0,
            domain_halfwidth: None,
        }
    }

    fn spec(&self) -> Result<BenchmarkSpec> {
        spec_with_halfwidth(self.function, self.dim, self.domain_halfwidth)
    }
}

/// Benchmark spec with an optional domain override.
pub fn spec_with_halfwidth(
    function: BenchmarkFn,
    dim: usize,
    halfwidth: Option<f64>,
) -> Result<BenchmarkSpec> {
    let mut spec = make_spec(function, dim)?;
    if let Some(hw) = halfwidth {
        if hw <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "domain_halfwidth",
                reason: format!("must be positive, got {hw}"),
            });
        }
        spec.lower = vec![-hw; dim];
        spec.upper = vec![hw; dim];
        if !spec.contains(&spec.global_min_point.clone()) {
            return Err(Error::InvalidParameter {
                name: "domain_halfwidth",
                reason: "domain no longer contains the global minimizer".to_string(),
            });
        }
    }
    Ok(spec)
}

/// One optimizer run on one landscape instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub function: BenchmarkFn,
    pub dim: usize,
    pub landscape: LandscapeKind,
    pub optimizer: OptimizerKind,
    pub seed_index: u64,
    pub distance: f64,
    pub result: OptResult,
    pub proxy_checksum: Option<u64>,
}

pub fn euclidean_distance(x: &[f64], x_star: &[f64]) -> Result<f64> {
    if x.len() != x_star.len() {
        return Err(Error::DimensionMismatch {
            expected: x_star.len(),
            got: x.len(),
        });
    }
    Ok(x.iter()
        .zip(x_star)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Train the proxy for one (function, landscape, seed) cell. Shared by both
/// optimizers for that cell.
pub fn train_proxy(config: &ExperimentConfig, seed_index: u64) -> Result<Arc<MlpModel>> {
    let spec = config.spec()?;
    let scheme = config.landscape.scheme().ok_or(Error::InvalidParameter {
        name: "landscape",
        reason: "ground-truth landscape has no proxy".to_string(),
    })?;
    let key = [
        function_index(config.function),
        config.dim as u64,
        config.landscape.index(),
        seed_index,
    ];
    let sample_seed = derive_seed(config.master_seed, &with_stream(&key, STREAM_SAMPLING));
    let init_seed = derive_seed(config.master_seed, &with_stream(&key, STREAM_INIT));
    let shuffle_seed = derive_seed(config.master_seed, &with_stream(&key, STREAM_SHUFFLE));

    let samples = sample(&spec, scheme, config.n_samples, config.sigma_frac, sample_seed)?;
    let (layers, mut train_config) = config.train.resolve(config.function, config.dim);
    train_config.seed = shuffle_seed;
    let mut model = build_mlp(&layers, init_seed)?;
    train(&mut model, &samples, &train_config)?;
    Ok(Arc::new(model))
}

fn with_stream(key: &[u64; 4], stream: u64) -> [u64; 5] {
    [key[0], key[1], key[2], key[3], stream]
}

fn optimizer_seed(config: &ExperimentConfig, seed_index: u64) -> u64 {
    let opt_idx = OptimizerKind::ALL
        .iter()
        .position(|&o| o == config.optimizer)
        .unwrap() as u64;
    derive_seed(
        config.master_seed,
        &[
            function_index(config.function),
            config.dim as u64,
            config.landscape.index(),
            seed_index,
            STREAM_OPTIMIZER + opt_idx,
        ],
    )
}

fn run_optimizer(
    config: &ExperimentConfig,
    objective: &Objective,
    seed: u64,
) -> Result<OptResult> {
    match config.optimizer {
        OptimizerKind::Pso => {
            let pso = PsoConfig {
                seed,
                ..config.pso.clone()
            };
            pso_run(&pso, objective)
        }
        OptimizerKind::Ga => {
            let ga = GaConfig {
                seed,
                ..config.ga.clone()
            };
            ga_run(&ga, objective)
        }
    }
}

/// Run one seeded trial: build the landscape (training a proxy unless
/// ground-truth), run the optimizer, measure the distance to the known
/// minimizer.
pub fn run_trial(config: &ExperimentConfig, seed_index: u64) -> Result<TrialRecord> {
    let proxy = match config.landscape {
        LandscapeKind::GroundTruth => None,
        _ => Some(train_proxy(config, seed_index).map_err(|e| tag_seed(e, seed_index))?),
    };
    run_trial_with_proxy(config, seed_index, proxy)
}

/// Trial execution against an already-built proxy (or none for ground truth).
pub fn run_trial_with_proxy(
    config: &ExperimentConfig,
    seed_index: u64,
    proxy: Option<Arc<MlpModel>>,
) -> Result<TrialRecord> {
    let spec = config.spec()?;
    let (objective, checksum) = match &proxy {
        None => (Objective::TrueFunction(spec.clone()), None),
        Some(model) => (
            Objective::Proxy((**model).clone(), spec.clone()),
            Some(model.checksum()),
        ),
    };
    let seed = optimizer_seed(config, seed_index);
    let result =
        run_optimizer(config, &objective, seed).map_err(|e| tag_seed(e, seed_index))?;
    let distance = euclidean_distance(&result.best_point, &spec.global_min_point)?;
    Ok(TrialRecord {
        function: config.function,
        dim: config.dim,
        landscape: config.landscape,
        optimizer: config.optimizer,
        seed_index,
        distance,
        result,
        proxy_checksum: checksum,
    })
}

fn tag_seed(e: Error, seed_index: u64) -> Error {
    Error::Config(format!("seed {seed_index}: {e}"))
}

/// Mean and population standard deviation of per-seed distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: BenchmarkFn,
    pub dim: usize,
    pub landscape: LandscapeKind,
    pub optimizer: OptimizerKind,
    pub distances: Vec<f64>,
    pub mean_distance: f64,
    pub std_distance: f64,
    /// Which std convention the numbers use.
    pub std_kind: &'static str,
    pub error: Option<String>,
}

pub fn summarize(distances: &[f64]) -> Result<(f64, f64)> {
    if distances.is_empty() {
        return Err(Error::InvalidParameter {
            name: "distances",
            reason: "empty list".to_string(),
        });
    }
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|&d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Full-grid configuration for `run_table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub dim: usize,
    pub functions: Vec<BenchmarkFn>,
    pub landscapes: Vec<LandscapeKind>,
    pub optimizers: Vec<OptimizerKind>,
    pub n_seeds: usize,
    pub n_samples: usize,
    pub sigma_frac: f64,
    pub train: TrainSettings,
    pub pso: PsoConfig,
    pub ga: GaConfig,
    pub master_seed: u64,
    pub domain_halfwidth: Option<f64>,
}

impl TableConfig {
    pub fn new(dim: usize) -> Self {
        TableConfig {
            dim,
            functions: BenchmarkFn::ALL.to_vec(),
            landscapes: LandscapeKind::ALL.to_vec(),
            optimizers: OptimizerKind::ALL.to_vec(),
            n_seeds: 5,
            n_samples: 10_000,
            sigma_frac: 0.1,
            train: TrainSettings::default(),
            pso: PsoConfig::default(),
            ga: GaConfig::default(),
            master_seed: 0,
            domain_halfwidth: None,
        }
    }

    fn cell(&self, function: BenchmarkFn, landscape: LandscapeKind, optimizer: OptimizerKind) -> ExperimentConfig {
        ExperimentConfig {
            function,
            dim: self.dim,
            landscape,
            optimizer,
            n_seeds: self.n_seeds,
            n_samples: self.n_samples,
            sigma_frac: self.sigma_frac,
            train: self.train.clone(),
            pso: self.pso.clone(),
            ga: self.ga.clone(),
            master_seed: self.master_seed,
            domain_halfwidth: self.domain_halfwidth,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableResult {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<SummaryRow>,
}

/// Execute the {functions x landscapes x optimizers x seeds} grid. Proxies
/// are trained once per (function, landscape, seed) and reused by both
/// optimizers. Rows come back in grid order regardless of scheduling.
pub fn run_table(config: &TableConfig) -> TableResult {
    // Train all needed proxies up front, in parallel.
    let proxy_jobs: Vec<(BenchmarkFn, LandscapeKind, u64)> = config
        .landscapes
        .iter()
        .filter(|l| l.scheme().is_some())
        .flat_map(|&l| {
            config.functions.iter().flat_map(move |&f| {
                (0..config.n_seeds as u64).map(move |s| (f, l, s))
            })
        })
        .collect();
    let proxies: HashMap<(BenchmarkFn, LandscapeKind, u64), Result<Arc<MlpModel>>> = proxy_jobs
        .par_iter()
        .map(|&(f, l, s)| {
            let cell = config.cell(f, l, OptimizerKind::Pso);
            ((f, l, s), train_proxy(&cell, s))
        })
        .collect();

    // Fixed grid order: landscape outer, then function, then optimizer.
    let cells: Vec<(LandscapeKind, BenchmarkFn, OptimizerKind)> = config
        .landscapes
        .iter()
        .flat_map(|&l| {
            config.functions.iter().flat_map(move |&f| {
                config.optimizers.iter().map(move |&o| (l, f, o))
            })
        })
        .collect();

    let trials: Vec<(usize, u64)> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| (0..config.n_seeds as u64).map(move |s| (ci, s)))
        .collect();

    let outcomes: Vec<Result<TrialRecord>> = trials
        .par_iter()
        .map(|&(ci, s)| {
            let (l, f, o) = cells[ci];
            let cell = config.cell(f, l, o);
            let proxy = match l {
                LandscapeKind::GroundTruth => None,
                _ => match &proxies[&(f, l, s)] {
                    Ok(m) => Some(m.clone()),
                    Err(e) => return Err(tag_seed(Error::Config(e.to_string()), s)),
                },
            };
            run_trial_with_proxy(&cell, s, proxy)
        })
        .collect();

    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (ci, &(l, f, o)) in cells.iter().enumerate() {
        let mut distances = Vec::new();
        let mut error = None;
        for (ti, outcome) in outcomes.iter().enumerate() {
            if trials[ti].0 != ci {
                continue;
            }
            match outcome {
                Ok(rec) => {
                    distances.push(rec.distance);
                    records.push(rec.clone());
                }
                Err(e) => error = Some(e.to_string()),
            }
        }
        let (mean, std) = if distances.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            summarize(&distances).unwrap()
        };
        rows.push(SummaryRow {
            function: f,
            dim: config.dim,
            landscape: l,
            optimizer: o,
            distances,
            mean_distance: mean,
            std_distance: std,
            std_kind: "population",
            error,
        });
    }
    TableResult { records, rows }
}
