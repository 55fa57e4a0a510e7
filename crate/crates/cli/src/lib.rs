//! Command-line harness for the gpada engine.

pub mod bench;
pub mod config;
pub mod report;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gpada::data::{generate_synthetic, load_dataset, write_dataset, Dataset, PoolState};
use gpada::engine::{evaluate, parse_metrics_csv, predict_ids, run_ada, warm_start, write_metrics_csv, TargetSplit};
use gpada::gp::class_wise_variances;
use gpada::model::{read_checkpoint, write_checkpoint, ModelState};

pub use config::{parse_config, Assignment, ConfigError, DatasetSource, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "gpada",
    version,
    about = "Active domain adaptation with class-wise GP query selection"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// gpas_plcs_ucs, gpas_ucs, gpas, random or entropy
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// Extra key=value setting, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the configured synthetic dataset to <out>/dataset.csv
    Synth,
    /// Run the adaptation loop; writes <out>/metrics.csv and <out>/model.csv
    Run,
    /// Write per-sample posterior variances to <out>/pv.csv
    GpProbe {
        /// Checkpoint providing pseudo-labels; defaults to the warm-up model
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Print the accuracy of a checkpoint on the configured split
    Eval {
        #[arg(long)]
        model: PathBuf,
    },
    /// Time selection rounds per strategy; writes <out>/bench.csv
    Bench(bench::BenchArgs),
    /// Plot accuracy over rounds for metrics files; writes <out>/report.svg
    Report {
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long, default_value = "Target accuracy over rounds")]
        title: String,
    },
}

/// Resolves the configuration: file, then `--set`, then dedicated flags.
pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?,
        None => String::new(),
    };
    let mut overrides = common
        .set
        .iter()
        .map(|s| Assignment::parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(seed) = common.seed {
        overrides.push(Assignment::new("--seed", "seed", seed.to_string()));
    }
    if let Some(s) = &common.strategy {
        overrides.push(Assignment::new("--strategy", "strategy", s.as_str()));
    }
    if let Some(out) = &common.out {
        overrides.push(Assignment::new("--out", "out", out.to_string_lossy()));
    }
    Ok(parse_config(&text, &overrides)?)
}

pub fn load_source(source: &DatasetSource) -> Result<Dataset> {
    match source {
        DatasetSource::File(path) => load_dataset(path).with_context(|| format!("loading dataset {}", path.display())),
        DatasetSource::Synthetic(spec) => Ok(generate_synthetic(spec)?),
    }
}

fn create_file(dir: &Path, name: &str) -> Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, file))
}

fn read_model(path: &Path) -> Result<ModelState> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_checkpoint(BufReader::new(file)).with_context(|| format!("reading checkpoint {}", path.display()))
}

/// Runs one command, writing human-readable output to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(&cli.common)?;
    match &cli.command {
        Command::Synth => {
            let DatasetSource::Synthetic(spec) = &cfg.source else {
                bail!("synth needs a synthetic dataset source, but the config names a dataset file");
            };
            let ds = generate_synthetic(spec)?;
            let (path, mut file) = create_file(&cfg.out_dir, "dataset.csv")?;
            write_dataset(&ds, &mut file).with_context(|| format!("writing {}", path.display()))?;
            writeln!(stdout, "wrote {} records to {}", ds.len(), path.display())?;
        }
        Command::Run => {
            let ds = load_source(&cfg.source)?;
            let outcome = run_ada(&cfg.loop_config, &ds)?;
            let (metrics_path, mut file) = create_file(&cfg.out_dir, "metrics.csv")?;
            write_metrics_csv(&outcome.metrics, &mut file)
                .with_context(|| format!("writing {}", metrics_path.display()))?;
            let (model_path, mut file) = create_file(&cfg.out_dir, "model.csv")?;
            write_checkpoint(&outcome.model, &mut file).with_context(|| format!("writing {}", model_path.display()))?;
            let last = outcome
                .metrics
                .last()
                .map_or(outcome.warmup_accuracy, |m| m.target_accuracy);
            writeln!(
                stdout,
                "strategy={} rounds={} queried={} accuracy={:.4} metrics={}",
                cfg.loop_config.strategy,
                outcome.metrics.len(),
                outcome.pool.budget_spent(),
                last,
                metrics_path.display()
            )?;
        }
        Command::GpProbe { model } => {
            let ds = load_source(&cfg.source)?;
            let lc = &cfg.loop_config;
            let (model, pool) = match model {
                Some(path) => {
                    let m = read_model(path)?;
                    let split = TargetSplit::new(&ds, lc.eval_fraction, lc.seed);
                    let pool = PoolState::new(ds.source_ids(), split.train_ids, lc.budget_fraction, lc.rounds)?;
                    (m, pool)
                }
                None => {
                    let w = warm_start(lc, &ds)?;
                    (w.model, w.pool)
                }
            };
            let pseudo = predict_ids(&model, &ds, pool.unlabeled_ids().iter().copied())?
                .into_iter()
                .map(|(id, (c, _))| (id, c))
                .collect();
            let pv = class_wise_variances(&pool, &ds, &pseudo, lc.jitter)?;
            let mut rows: Vec<(u64, f64)> = pv.iter().collect();
            rows.sort_unstable_by_key(|r| r.0);
            let (path, file) = create_file(&cfg.out_dir, "pv.csv")?;
            let mut w = std::io::BufWriter::new(file);
            writeln!(w, "id,pseudo_label,posterior_variance")?;
            for (id, v) in &rows {
                writeln!(w, "{id},{},{v}", pseudo[id])?;
            }
            w.flush().with_context(|| format!("writing {}", path.display()))?;
            writeln!(stdout, "wrote {} variances to {}", rows.len(), path.display())?;
        }
        Command::Eval { model } => {
            let ds = load_source(&cfg.source)?;
            let m = read_model(model)?;
            let lc = &cfg.loop_config;
            let split = TargetSplit::new(&ds, lc.eval_fraction, lc.seed);
            let acc = evaluate(&m, &ds, lc.eval_split, &split)?;
            writeln!(
                stdout,
                "accuracy={acc:.6} split={} n={}",
                lc.eval_split.as_str(),
                split.ids(lc.eval_split).len()
            )?;
        }
        Command::Bench(args) => {
            let rows = bench::run(args, &cfg.loop_config)?;
            let (path, mut file) = create_file(&cfg.out_dir, "bench.csv")?;
            bench::write_csv(&rows, &mut file).with_context(|| format!("writing {}", path.display()))?;
            for s in bench::summarize(&rows) {
                writeln!(stdout, "{s}")?;
            }
            writeln!(stdout, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        Command::Report { metrics, title } => {
            let mut series = Vec::new();
            for path in metrics {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let rows = parse_metrics_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
                let label = path
                    .parent()
                    .and_then(|p| p.file_name())
                    .filter(|_| path.file_stem().is_some_and(|s| s == "metrics"))
                    .or_else(|| path.file_stem())
                    .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                series.push(report::Series { label, rows });
            }
            let svg = report::render_svg(&series, title);
            let (path, mut file) = create_file(&cfg.out_dir, "report.svg")?;
            file.write_all(svg.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(stdout, "wrote {} series to {}", series.len(), path.display())?;
        }
    }
    Ok(())
}

/// Single-line rendering of an error chain.
pub fn one_line(err: &anyhow::Error) -> String {
    format!("{err:#}").replace(['\n', '\r'], " ")
}
