//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use duskfcm_core::clustering::Method;
use duskfcm_core::metrics::{full_report, mean_report, MetricsReport, METRIC_NAMES};
use duskfcm_core::phantom::PhantomConfig;

use crate::bench::benchmark_compare;
use crate::calibrate::{calibrate, DEFAULT_ROWS_PER_IMAGE};
use crate::config::{Overrides, PipelineConfig, SEED_ENV};
use crate::dataio::{image_files, index_dataset, load_mask};
use crate::error::{exit_code_for, Error, Result};
use crate::phantoms::write_phantom_set;
use crate::report::MetricValues;
use crate::runner::run_pipeline;

#[derive(Debug, Parser)]
#[command(name = "duskfcm", version, about = "Coarse-to-fine lesion segmentation and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment every image of a dataset and write masks, overlays and reports.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Pick a feature subset from labelled samples and store it in a config.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Config file to write; defaults to the `--config` file.
        #[arg(long)]
        write: Option<PathBuf>,
        /// Rows sampled from each image.
        #[arg(long, default_value_t = DEFAULT_ROWS_PER_IMAGE)]
        rows: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run several methods on one dataset and tabulate their mean metrics.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "duskfcm,skfcm,fcm,fkm,gmm")]
        methods: Vec<Method>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Score predicted masks against ground truth. Both paths are files, or
    /// both are directories paired by file stem (a `_mask` suffix on
    /// predictions is ignored).
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Print JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic disk-phantom dataset.
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Index of the first set member.
        #[arg(long, default_value_t = 0)]
        first: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20.0)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        salt_pepper: f64,
    },
}

fn resolve(config: Option<&Path>, overrides: &Overrides) -> Result<PipelineConfig> {
    let env = std::env::var(SEED_ENV).ok();
    PipelineConfig::resolve(config, env.as_deref(), overrides)
}

fn score_pairs(pred: &Path, gt: &Path) -> Result<BTreeMap<String, MetricsReport>> {
    if pred.is_file() && gt.is_file() {
        let id = gt.file_stem().and_then(|s| s.to_str()).unwrap_or("sample").to_owned();
        return Ok(BTreeMap::from([(id, full_report(&load_mask(pred)?, &load_mask(gt)?)?)]));
    }
    if !pred.is_dir() || !gt.is_dir() {
        return Err(Error::Config("--pred and --gt must both be files or both be directories".into()));
    }
    let preds: BTreeMap<String, PathBuf> =
        image_files(pred)?.into_iter().map(|(id, p)| (id.strip_suffix("_mask").unwrap_or(&id).to_owned(), p)).collect();
    let mut out = BTreeMap::new();
    for (id, gt_path) in image_files(gt)? {
        if let Some(p) = preds.get(&id) {
            out.insert(id, full_report(&load_mask(p)?, &load_mask(&gt_path)?)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no prediction matches a ground-truth file".into()));
    }
    Ok(out)
}

fn metrics_output(reports: &BTreeMap<String, MetricsReport>, json: bool) -> String {
    let values: Vec<MetricsReport> = reports.values().copied().collect();
    let mean = mean_report(&values).map(MetricValues::from);
    if json {
        let body = serde_json::json!({ "samples": reports, "mean": mean });
        return serde_json::to_string_pretty(&body).expect("metrics serialize") + "\n";
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = ["id"].into_iter().chain(METRIC_NAMES).chain(["flags"]).collect();
    w.write_record(&header).expect("in-memory write");
    for (id, r) in reports {
        let row = std::iter::once(id.clone()).chain(r.values().map(|v| v.to_string())).chain([r.flags.describe()]);
        w.write_record(row).expect("in-memory write");
    }
    if let Some(m) = mean {
        let row = std::iter::once("mean".to_owned()).chain(m.values().map(|v| v.to_string())).chain([String::new()]);
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Executes one parsed command and returns the process exit status.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = resolve(config.as_deref(), &overrides)?;
            let report = run_pipeline(&cfg)?;
            let agg = &report.aggregate;
            print!("{} samples, {} scored, {} failed", agg.samples, agg.scored, agg.failed);
            match &agg.mean {
                Some(m) => println!("; mean dice {:.4}, iou {:.4}, accuracy {:.4}", m.dice, m.iou, m.sa),
                None => println!(),
            }
            for (id, s) in report.samples.iter().filter(|(_, s)| s.error.is_some()) {
                eprintln!("{id}: {}", s.error.as_deref().unwrap_or_default());
            }
            Ok(exit_code_for(agg.failed))
        }
        Command::Calibrate { config, write, rows, overrides } => {
            let mut cfg = resolve(config.as_deref(), &overrides)?;
            let index = index_dataset(cfg.dataset_root()?)?;
            let cal = calibrate(&cfg, &index, rows)?;
            println!(
                "selected {} features (merit {:.4}) from {} rows of {} images: {}",
                cal.selected_features.len(),
                cal.merit,
                cal.rows,
                cal.images,
                cal.selected_features.join(", ")
            );
            cfg.selected_features = Some(cal.selected_features);
            match write.or(config) {
                Some(path) => cfg.save(&path)?,
                None => print!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n"),
            }
            Ok(0)
        }
        Command::Bench { config, methods, overrides } => {
            let cfg = resolve(config.as_deref(), &overrides)?;
            let table = benchmark_compare(&cfg, &methods)?;
            print!("{}", table.to_text());
            Ok(exit_code_for(table.rows.iter().map(|r| r.failed).sum()))
        }
        Command::Metrics { pred, gt, json } => {
            print!("{}", metrics_output(&score_pairs(&pred, &gt)?, json));
            Ok(0)
        }
        Command::Phantom { out, count, first, size, seed, noise_sigma, salt_pepper } => {
            let base =
                PhantomConfig { width: size, height: size, noise_sigma, salt_pepper, seed, ..PhantomConfig::default() };
            write_phantom_set(&out, &base, first, count)?;
            println!("wrote {count} phantoms to {}", out.display());
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
