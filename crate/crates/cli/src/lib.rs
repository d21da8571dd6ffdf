//! Subcommands of the `corrosion` binary.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use corrosion_core::io::{read_params_file, read_points_file, write_params_file, write_points_file, ParamsDocument};
use corrosion_core::{calibrate, corrosion_rate, CalibrationOptions, CalibrationPoint, ModelParams};
use corrosion_ingest::{monthly_summary, preprocess, read_features_file, write_features_file, write_monthly_summary, FEATURE_NAMES};
use corrosion_ml::{evaluate_all, partition, train_families, Dataset, EvalReport, Family, Grid, TrainConfig, TrainedModel, SplitSpec};
use corrosion_monitor::{router, spawn, ModelRegistry, MonitorSim, SimConfig, TickMode};
use corrosion_sensornet::{write_corpus_file, Network, NetworkConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Parser)]
#[command(name = "corrosion", version, about = "Heritage corrosion monitoring toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit C and n to observed rates.
    Calibrate(CalibrateArgs),
    /// Write synthetic calibration points drawn from known parameters.
    GenPoints(GenPointsArgs),
    /// Run the sensor network and write the gateway corpus.
    Simulate(SimulateArgs),
    /// Clean a corpus and derive the feature file.
    Preprocess(PreprocessArgs),
    /// Grid-search and fit regression models.
    Train(TrainArgs),
    /// Score saved models on their held-out partition.
    Evaluate(EvaluateArgs),
    /// Run the live monitor with its HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 50.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub n0: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenPointsArgs {
    #[arg(long = "c", default_value_t = 100.0)]
    pub c: f64,
    #[arg(long = "n", default_value_t = 2.0)]
    pub n: f64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Relative standard deviation of multiplicative noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub days: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "loss-p")]
    pub loss_p: Option<f64>,
    /// Network configuration JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Gap-fill lost uplinks from the station logs at the end of the run.
    #[arg(long)]
    pub retransmit: bool,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Calibrated parameter file; defaults to C = 50, n = 1.5.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Monthly aggregate CSV.
    #[arg(long)]
    pub monthly: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// linear, forest, gbm, gbm2 or all.
    #[arg(long, default_value = "all")]
    pub family: String,
    #[arg(long, default_value_t = 0.75)]
    pub split: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// `default` or a JSON grid file.
    #[arg(long, default_value = "default")]
    pub grid: String,
    /// Rows sampled before splitting.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 50.0)]
    pub alarm_threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 50.0)]
    pub alarm_threshold: f64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "models")]
    pub models: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long = "tick-ms", default_value_t = 2000)]
    pub tick_ms: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tick every millisecond regardless of `--tick-ms`.
    #[arg(long)]
    pub fast: bool,
    /// Simulation configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate(a) => cmd_calibrate(&a),
        Command::GenPoints(a) => cmd_gen_points(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Serve(a) => cmd_serve(&a),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> Result<()> {
    let points = read_points_file(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let init = ModelParams::new(a.c0, a.n0);
    let result = calibrate(&points, &init, &CalibrationOptions::default())?;
    write_params_file(&a.out, &ParamsDocument::from(&result))?;
    println!(
        "C = {:.6e}  n = {:.6}  residual_norm = {:.6e}  iterations = {}  converged = {}",
        result.params.c, result.params.n, result.residual_norm, result.iterations, result.converged
    );
    Ok(())
}

/// Points with `rh ∈ [0.3, 0.95)`, `T ∈ [0, 40)` °C and multiplicative Gaussian noise.
pub fn synthetic_points(params: &ModelParams, count: usize, noise: f64, seed: u64) -> Result<Vec<CalibrationPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = Normal::new(0.0, 1.0)?;
    (0..count)
        .map(|_| {
            let rh = rng.random_range(0.3..0.95);
            let t = rng.random_range(0.0..40.0);
            let cr = corrosion_rate(params, t, rh)? * (1.0 + noise * eps.sample(&mut rng));
            Ok(CalibrationPoint::new(rh, t, cr.max(0.0)))
        })
        .collect()
}

pub fn cmd_gen_points(a: &GenPointsArgs) -> Result<()> {
    let params = ModelParams::new(a.c, a.n);
    params.validate()?;
    let points = synthetic_points(&params, a.count, a.noise, a.seed)?;
    write_points_file(&a.out, &points)?;
    println!("wrote {} points to {}", points.len(), a.out.display());
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => NetworkConfig::from_json_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => NetworkConfig::default(),
    };
    if let Some(d) = a.days {
        config.days = d;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(p) = a.loss_p {
        config.loss_p = p;
    }
    if a.retransmit {
        config.retransmit = true;
    }
    let start = Instant::now();
    let network = Network::run(config)?;
    let rows = write_corpus_file(&a.out, &network)?;
    let r = network.report();
    println!(
        "{rows} rows  samples {}  batches {}/{} delivered  retransmitted {}  max station-gateway offset {:.3} ms  bound violations {}  ({:.1} s)",
        r.samples,
        r.batches_delivered,
        r.batches_sent,
        r.records_retransmitted,
        r.sync.max_station_gateway_offset_ms,
        r.sync.bound_violations,
        start.elapsed().as_secs_f64()
    );
    ensure!(r.sync.bound_violations == 0, "clock offset bound violated {} times", r.sync.bound_violations);
    Ok(())
}

pub fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let params = match &a.params {
        Some(p) => read_params_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => ModelParams::default(),
    };
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let out = preprocess(BufReader::new(file), &params)?;
    ensure!(out.report.is_conserved(), "row accounting does not balance: {:?}", out.report);
    write_features_file(&a.out, &out.rows)?;
    if let Some(path) = &a.report {
        write_json(path, &out.report)?;
    }
    if let Some(path) = &a.monthly {
        write_monthly_summary(BufWriter::new(File::create(path)?), &monthly_summary(&out.rows))?;
    }
    let r = &out.report;
    println!(
        "read {}  skipped {}  duplicates {}  dropped for coverage {}  feature rows {}",
        r.rows_read, r.skipped_at_parse, r.duplicates, r.dropped_for_coverage, r.feature_rows
    );
    Ok(())
}

pub fn parse_families(s: &str) -> Result<Vec<Family>> {
    if s == "all" {
        return Ok(Family::ALL.to_vec());
    }
    s.split(',').map(|f| Ok(f.trim().parse::<Family>()?)).collect()
}

pub fn load_grid(s: &str) -> Result<Grid> {
    if s == "default" {
        return Ok(Grid::default());
    }
    let text = std::fs::read_to_string(s).with_context(|| format!("reading grid {s}"))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let rows = read_features_file(path).with_context(|| format!("reading {}", path.display()))?;
    ensure!(!rows.is_empty(), "{} holds no feature rows", path.display());
    Ok(Dataset::from_feature_rows(&rows))
}

/// One line per model: accuracy plus training and inference wall-clock.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = format!(
        "{:<8} {:>10} {:>10} {:>10} {:>8} {:>8} {:>10} {:>10}\n",
        "model", "RMSE", "MAE", "R2", "alarm P", "alarm R", "train s", "infer s"
    );
    for e in &report.entries {
        out.push_str(&format!(
            "{:<8} {:>10.4} {:>10.4} {:>10.6} {:>8.3} {:>8.3} {:>10.3} {:>10.3}\n",
            e.model_id,
            e.metrics.rmse,
            e.metrics.mae,
            e.metrics.r2.unwrap_or(f64::NAN),
            e.alarm.precision.unwrap_or(f64::NAN),
            e.alarm.recall.unwrap_or(f64::NAN),
            e.train_seconds,
            e.inference_seconds
        ));
    }
    out
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let data = load_dataset(&a.features)?;
    let config = TrainConfig {
        families: parse_families(&a.family)?,
        split: SplitSpec::new(a.split),
        sample_size: a.sample,
        seed: a.seed,
        grid: load_grid(&a.grid)?,
    };
    std::fs::create_dir_all(&a.out)?;
    let run = train_families(&data, &config)?;
    for m in &run.models {
        m.save_file(a.out.join(format!("{}.model", m.id())))?;
    }
    write_json(&a.out.join("grid.json"), &run.searches)?;
    let report = evaluate_all(&run.models, run.train.len(), &run.test, a.alarm_threshold)?;
    write_json(&a.out.join("eval.json"), &report)?;
    println!("train {} rows, test {} rows", run.train.len(), run.test.len());
    print!("{}", format_report(&report));
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&a.models)
        .with_context(|| format!("listing {}", a.models.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "model"))
        .collect();
    paths.sort();
    ensure!(!paths.is_empty(), "no .model files in {}", a.models.display());
    let models = paths
        .iter()
        .map(|p| TrainedModel::load_file_expecting(p, &FEATURE_NAMES).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let meta = models[0].meta;
    for m in &models[1..] {
        if m.meta.split_fraction != meta.split_fraction || m.meta.sample_size != meta.sample_size || m.meta.seed != meta.seed {
            bail!("models were trained on different partitions; evaluate them separately");
        }
    }
    let data = load_dataset(&a.features)?;
    let (train, test) = partition(&data, &meta)?;
    ensure!(
        train.len() == meta.train_rows,
        "feature file gives {} training rows but the models saw {}",
        train.len(),
        meta.train_rows
    );
    let report = evaluate_all(&models, train.len(), &test, a.alarm_threshold)?;
    write_json(&a.report, &report)?;
    print!("{}", format_report(&report));
    Ok(())
}

pub fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => serde_json::from_reader(BufReader::new(File::open(p)?))?,
        None => SimConfig::default(),
    };
    config.seed = a.seed;
    let registry = ModelRegistry::load_dir(&a.models);
    for e in registry.load_errors() {
        tracing::warn!("model not loaded: {e}");
    }
    if registry.is_empty() {
        tracing::warn!("no models available, running in contingency mode");
    }
    let sim = MonitorSim::new(config, Arc::new(registry))?;
    let period = if a.fast { Duration::from_millis(1) } else { Duration::from_millis(a.tick_ms.max(1)) };
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("bad listen address")?;
    tokio::runtime::Runtime::new()?.block_on(async move {
        let (handle, _task) = spawn(sim, TickMode::Wall(period));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        tracing::info!("serving on http://{}", listener.local_addr()?);
        axum::serve(listener, router(handle)).await?;
        Ok(())
    })
}
