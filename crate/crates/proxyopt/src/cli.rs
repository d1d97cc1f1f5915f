//! Command-line driver: subcommands for each pipeline stage plus the full
//! table and figure-data exports. Every subcommand writes a run manifest
//! next to its outputs.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::benchmarks::BenchmarkFn;
use crate::error::{Error, Result};
use crate::harness::{
    export_figure_data, run_table, spec_with_halfwidth, write_manifest, write_summary_csv,
    write_trials_csv, LandscapeKind, RunManifest, TableConfig, TrainSettings,
};
use crate::neuralnet::{build_mlp, train, MlpModel};
use crate::optimizers::{ga_run, pso_run, GaConfig, Objective, OptimizerKind, PsoConfig};
use crate::sampling::{sample, SampleSet, SamplingScheme};
use crate::{fmt_f64, harness};

pub const SEED_ENV_VAR: &str = "PROXYOPT_SEED";

#[derive(Debug, Parser)]
#[command(name = "proxyopt", version, about = "NN-proxy optimization benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled training set and write it as CSV.
    Sample(SampleArgs),
    /// Train an MLP proxy from a samples CSV.
    Train(TrainArgs),
    /// Run one optimizer on the true function or a saved proxy.
    Optimize(OptimizeArgs),
    /// Run the full experiment grid for one dimension.
    Table(TableArgs),
    /// Export 2D landscape rasters and per-seed solution points.
    FigureData(FigureDataArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub function: BenchmarkFn,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub scheme: SamplingScheme,
    /// Dense sample budget; sparse takes 25% of it.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub halfwidth: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Samples CSV produced by `sample`.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub function: BenchmarkFn,
    #[arg(long)]
    pub dim: usize,
    /// Layer sizes incl. input/output, comma separated (e.g. 2,15,50,15,1).
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub halfwidth: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Optimize the true function instead of a proxy.
    #[arg(long, conflicts_with = "model")]
    pub ground_truth: bool,
    /// Saved proxy model file.
    #[arg(long, required_unless_present = "ground_truth")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub function: BenchmarkFn,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub opt: OptimizerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub swarm_size: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub halfwidth: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// Restrict to one landscape (repeatable).
    #[arg(long)]
    pub landscape: Vec<LandscapeKind>,
    /// Restrict to one function (repeatable).
    #[arg(long)]
    pub function: Vec<BenchmarkFn>,
    /// Restrict to one optimizer (repeatable).
    #[arg(long)]
    pub opt: Vec<OptimizerKind>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    /// JSON config file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for trial scheduling (default: all processors).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FigureDataArgs {
    #[arg(long)]
    pub function: BenchmarkFn,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub scheme: SamplingScheme,
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl clap::builder::ValueParserFactory for BenchmarkFn {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<BenchmarkFn>().map_err(|e| e.to_string())
        })
    }
}

impl clap::builder::ValueParserFactory for SamplingScheme {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<SamplingScheme>().map_err(|e| e.to_string())
        })
    }
}

impl clap::builder::ValueParserFactory for OptimizerKind {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<OptimizerKind>().map_err(|e| e.to_string())
        })
    }
}

impl clap::builder::ValueParserFactory for LandscapeKind {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| {
            s.parse::<LandscapeKind>().map_err(|e| e.to_string())
        })
    }
}

/// Optional JSON overrides for `table`; any explicit flag wins.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n_samples: Option<usize>,
    pub n_seeds: Option<usize>,
    pub sigma_frac: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub master_seed: Option<u64>,
    pub swarm_size: Option<usize>,
    pub iterations: Option<usize>,
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub domain_halfwidth: Option<f64>,
}

/// Master seed resolution: PROXYOPT_SEED env var beats flags and config.
fn resolve_seed(flag_value: u64) -> Result<u64> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Config(format!(
            "{SEED_ENV_VAR} must be an unsigned integer, got `{s}`"
        ))),
        Err(_) => Ok(flag_value),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {dir:?}"), e))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Train(args) => cmd_train(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Table(args) => cmd_table(args),
        Command::FigureData(args) => cmd_figure_data(args),
    }
}

pub fn cmd_sample(args: SampleArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let seed = resolve_seed(args.seed)?;
    let spec = spec_with_halfwidth(args.function, args.dim, args.halfwidth)?;
    let set = sample(&spec, args.scheme, args.n, args.sigma_frac, seed)?;

    let stem = format!("samples_{}_{}d_{}", args.function, args.dim, args.scheme.name());
    let csv_path = args.out.join(format!("{stem}.csv"));
    let file = File::create(&csv_path).map_err(|e| Error::io(format!("creating {csv_path:?}"), e))?;
    set.write_csv(BufWriter::new(file))?;

    let manifest = RunManifest::new(
        "sample",
        seed,
        serde_json::json!({
            "function": args.function, "dim": args.dim, "scheme": args.scheme,
            "n": args.n, "sigma_frac": args.sigma_frac, "seed": seed,
            "halfwidth": args.halfwidth,
        }),
        vec![csv_path.display().to_string()],
    );
    write_manifest(&args.out.join(format!("{stem}.manifest.json")), &manifest)?;
    println!("wrote {} rows to {}", set.len(), csv_path.display());
    Ok(())
}

pub fn cmd_train(args: TrainArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let seed = resolve_seed(args.seed)?;
    let spec = spec_with_halfwidth(args.function, args.dim, args.halfwidth)?;

    let file = File::open(&args.samples)
        .map_err(|e| Error::io(format!("opening {:?}", args.samples), e))?;
    let set = SampleSet::read_csv(BufReader::new(file), SamplingScheme::Dense, spec, seed)?;
    if set.dim() != args.dim {
        return Err(Error::DimensionMismatch {
            expected: args.dim,
            got: set.dim(),
        });
    }

    // A seeded 10% of the rows is held out for a diagnostic MSE; it never
    // feeds back into training (no early stopping).
    let (train_set, holdout) = split_holdout(&set, harness::derive_seed(seed, &[2]));

    let settings = TrainSettings {
        layers: args.layers.clone(),
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
    };
    let (layers, mut config) = settings.resolve(args.function, args.dim);
    config.seed = harness::derive_seed(seed, &[1]);
    let mut model = build_mlp(&layers, harness::derive_seed(seed, &[0]))?;
    let history = train(&mut model, &train_set, &config)?;
    let holdout_mse = match &holdout {
        Some(h) => Some(model.loss_and_gradients(h.inputs.view(), &h.targets)?.0),
        None => None,
    };

    let stem = format!("model_{}_{}d", args.function, args.dim);
    let model_path = args.out.join(format!("{stem}.mlp"));
    let file = File::create(&model_path)
        .map_err(|e| Error::io(format!("creating {model_path:?}"), e))?;
    model.save(BufWriter::new(file))?;

    let loss_path = args.out.join(format!("{stem}_loss.csv"));
    write_loss_history(&loss_path, &history)?;

    let manifest = RunManifest::new(
        "train",
        seed,
        serde_json::json!({
            "samples": args.samples.display().to_string(),
            "function": args.function, "dim": args.dim,
            "layers": layers, "train": config, "halfwidth": args.halfwidth,
            "holdout_mse": holdout_mse,
        }),
        vec![model_path.display().to_string(), loss_path.display().to_string()],
    );
    write_manifest(&args.out.join(format!("{stem}.manifest.json")), &manifest)?;
    match holdout_mse {
        Some(mse) => println!(
            "trained {layers:?} for {} epochs; final loss {:.6e}, held-out mse {:.6e} ({} rows)",
            history.len(),
            history.last().unwrap(),
            mse,
            holdout.as_ref().unwrap().len(),
        ),
        None => println!(
            "trained {layers:?} for {} epochs; final loss {:.6e}",
            history.len(),
            history.last().unwrap()
        ),
    }
    Ok(())
}

/// Seeded 90/10 row split. Fewer than 10 rows: no holdout.
fn split_holdout(set: &SampleSet, seed: u64) -> (SampleSet, Option<SampleSet>) {
    let n = set.len();
    let n_hold = n / 10;
    if n_hold == 0 {
        return (set.clone(), None);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |rows: &[usize]| {
        let d = set.dim();
        let mut inputs = Array2::zeros((rows.len(), d));
        let mut targets = Vec::with_capacity(rows.len());
        for (i, &src) in rows.iter().enumerate() {
            inputs.row_mut(i).assign(&set.inputs.row(src));
            targets.push(set.targets[src]);
        }
        SampleSet {
            inputs,
            targets,
            scheme: set.scheme,
            spec: set.spec.clone(),
            seed: set.seed,
        }
    };
    (take(&order[n_hold..]), Some(take(&order[..n_hold])))
}

fn write_loss_history(path: &Path, history: &[f64]) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io("writing loss history", e);
    writeln!(w, "epoch,loss").map_err(io)?;
    for (i, &loss) in history.iter().enumerate() {
        writeln!(w, "{},{}", i, fmt_f64(loss)).map_err(io)?;
    }
    Ok(())
}

pub fn cmd_optimize(args: OptimizeArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let seed = resolve_seed(args.seed)?;
    if args.iterations == Some(0) || args.generations == Some(0) {
        return Err(Error::InvalidParameter {
            name: "budget",
            reason: "iterations/generations must be >= 1".to_string(),
        });
    }
    let spec = spec_with_halfwidth(args.function, args.dim, args.halfwidth)?;

    let objective = if args.ground_truth {
        Objective::TrueFunction(spec.clone())
    } else {
        let path = args.model.as_ref().unwrap();
        let file = File::open(path).map_err(|e| Error::io(format!("opening {path:?}"), e))?;
        let model = MlpModel::load(BufReader::new(file))?;
        if model.input_dim() != args.dim {
            return Err(Error::DimensionMismatch {
                expected: args.dim,
                got: model.input_dim(),
            });
        }
        Objective::Proxy(model, spec.clone())
    };

    let result = match args.opt {
        OptimizerKind::Pso => {
            let config = PsoConfig {
                seed,
                iterations: args.iterations.unwrap_or(PsoConfig::default().iterations),
                swarm_size: args.swarm_size.unwrap_or(PsoConfig::default().swarm_size),
                ..PsoConfig::default()
            };
            pso_run(&config, &objective)?
        }
        OptimizerKind::Ga => {
            let config = GaConfig {
                seed,
                generations: args.generations.unwrap_or(GaConfig::default().generations),
                population_size: args
                    .population_size
                    .unwrap_or(GaConfig::default().population_size),
                ..GaConfig::default()
            };
            ga_run(&config, &objective)?
        }
    };
    let distance = harness::euclidean_distance(&result.best_point, &spec.global_min_point)?;

    let report = serde_json::json!({
        "function": args.function,
        "dim": args.dim,
        "optimizer": args.opt,
        "ground_truth": args.ground_truth,
        "seed": seed,
        "best_point": result.best_point,
        "best_value": result.best_value,
        "distance_to_minimum": distance,
        "evaluations": result.evaluations,
        "trajectory": result.trajectory,
    });
    let stem = format!("optimize_{}_{}d_{}", args.function, args.dim, args.opt);
    let json_path = args.out.join(format!("{stem}.json"));
    let file = File::create(&json_path)
        .map_err(|e| Error::io(format!("creating {json_path:?}"), e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)
        .map_err(|e| Error::Config(format!("serializing result: {e}")))?;

    let manifest = RunManifest::new(
        "optimize",
        seed,
        serde_json::json!({
            "function": args.function, "dim": args.dim, "opt": args.opt,
            "ground_truth": args.ground_truth,
            "model": args.model.as_ref().map(|p| p.display().to_string()),
            "halfwidth": args.halfwidth,
        }),
        vec![json_path.display().to_string()],
    );
    write_manifest(&args.out.join(format!("{stem}.manifest.json")), &manifest)?;
    println!(
        "{} best value {:.6e} at distance {:.6e} from the known minimum",
        args.opt, result.best_value, distance
    );
    Ok(())
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let file = File::open(p).map_err(|e| Error::io(format!("opening {p:?}"), e))?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Error::Config(format!("parsing {p:?}: {e}")))
        }
    }
}

/// Build the resolved table configuration from file config and flags.
pub fn resolve_table_config(args: &TableArgs) -> Result<TableConfig> {
    let fc = load_file_config(args.config.as_deref())?;
    let mut config = TableConfig::new(args.dim);
    if !args.function.is_empty() {
        config.functions = args.function.clone();
    }
    if !args.landscape.is_empty() {
        config.landscapes = args.landscape.clone();
    }
    if !args.opt.is_empty() {
        config.optimizers = args.opt.clone();
    }
    config.n_seeds = if args.seeds != 5 { args.seeds } else { fc.n_seeds.unwrap_or(args.seeds) };
    config.n_samples = if args.n != 10_000 { args.n } else { fc.n_samples.unwrap_or(args.n) };
    config.sigma_frac = fc.sigma_frac.unwrap_or(config.sigma_frac);
    config.train.epochs = args.epochs.or(fc.epochs);
    config.train.batch_size = fc.batch_size;
    config.train.learning_rate = fc.learning_rate;
    if let Some(v) = fc.swarm_size {
        config.pso.swarm_size = v;
    }
    if let Some(v) = fc.iterations {
        config.pso.iterations = v;
    }
    if let Some(v) = fc.population_size {
        config.ga.population_size = v;
    }
    if let Some(v) = fc.generations {
        config.ga.generations = v;
    }
    config.domain_halfwidth = fc.domain_halfwidth;
    let flag_seed = if args.master_seed != 0 {
        args.master_seed
    } else {
        fc.master_seed.unwrap_or(args.master_seed)
    };
    config.master_seed = resolve_seed(flag_seed)?;
    Ok(config)
}

pub fn cmd_table(args: TableArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let config = resolve_table_config(&args)?;
    let result = run_table(&config);

    let trials_path = args.out.join(format!("trials_{}d.csv", config.dim));
    let summary_path = args.out.join(format!("summary_{}d.csv", config.dim));
    write_trials_csv(&trials_path, &result.records)?;
    write_summary_csv(&summary_path, &result.rows)?;

    let manifest = RunManifest::new(
        "table",
        config.master_seed,
        serde_json::to_value(&config).map_err(|e| Error::Config(e.to_string()))?,
        vec![
            trials_path.display().to_string(),
            summary_path.display().to_string(),
        ],
    );
    write_manifest(&args.out.join(format!("table_{}d.manifest.json", config.dim)), &manifest)?;

    for row in &result.rows {
        match &row.error {
            None => println!(
                "{:12} {:12} {:4}  mean {:.4}  std {:.4}",
                row.function.name(),
                row.landscape.name(),
                row.optimizer.name(),
                row.mean_distance,
                row.std_distance
            ),
            Some(e) => println!(
                "{:12} {:12} {:4}  ERROR: {e}",
                row.function.name(),
                row.landscape.name(),
                row.optimizer.name()
            ),
        }
    }
    Ok(())
}

pub fn cmd_figure_data(args: FigureDataArgs) -> Result<()> {
    if args.dim != 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "figure-data supports only --dim 2".to_string(),
        });
    }
    ensure_out_dir(&args.out)?;
    let master_seed = resolve_seed(args.master_seed)?;

    let landscape = match args.scheme {
        SamplingScheme::Dense => LandscapeKind::Dense,
        SamplingScheme::Sparse => LandscapeKind::Sparse,
        SamplingScheme::Gaussian => LandscapeKind::Gaussian,
    };
    let mut config = TableConfig::new(2);
    config.functions = vec![args.function];
    config.landscapes = vec![landscape];
    config.n_seeds = args.seeds;
    config.n_samples = args.n;
    config.train.epochs = args.epochs;
    config.master_seed = master_seed;
    let table = run_table(&config);
    if let Some(row) = table.rows.iter().find(|r| r.error.is_some()) {
        return Err(Error::Config(format!(
            "trial failed: {}",
            row.error.as_ref().unwrap()
        )));
    }

    // Raster uses the first seed's proxy; the point cloud covers all seeds.
    let cell = harness::ExperimentConfig {
        function: args.function,
        dim: 2,
        landscape,
        optimizer: OptimizerKind::Pso,
        n_seeds: config.n_seeds,
        n_samples: config.n_samples,
        sigma_frac: config.sigma_frac,
        train: config.train.clone(),
        pso: config.pso.clone(),
        ga: config.ga.clone(),
        master_seed,
        domain_halfwidth: None,
    };
    let proxy = harness::train_proxy(&cell, 0)?;
    let spec = spec_with_halfwidth(args.function, 2, None)?;
    let data = export_figure_data(&spec, &proxy, &table.records)?;

    let stem = format!("figure_{}_{}", args.function, args.scheme.name());
    let raster_path = args.out.join(format!("{stem}_raster.csv"));
    let points_path = args.out.join(format!("{stem}_points.csv"));
    data.write_raster_csv(&raster_path)?;
    data.write_points_csv(&points_path)?;

    let manifest = RunManifest::new(
        "figure-data",
        master_seed,
        serde_json::to_value(&config).map_err(|e| Error::Config(e.to_string()))?,
        vec![
            raster_path.display().to_string(),
            points_path.display().to_string(),
        ],
    );
    write_manifest(&args.out.join(format!("{stem}.manifest.json")), &manifest)?;
    println!(
        "wrote {} raster rows and {} solution points",
        data.raster.len(),
        data.points.len()
    );
    Ok(())
}
