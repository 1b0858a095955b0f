//! Run reports: per-sample metrics and timings, aggregate means, and their
//! JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use duskfcm_core::metrics::{mean_report, MetricsReport, METRIC_NAMES};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, ReportFormat};
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
/// Id of the aggregate row in `report.csv`.
pub const MEAN_ROW: &str = "mean";

/// Wall-clock stage durations in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub feature_ms: f64,
    pub cluster_ms: f64,
    pub refine_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub lesion_cluster: usize,
    /// Another cluster tied for the highest redness.
    pub ambiguous_lesion: bool,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    /// Kernel bandwidth actually used, for kernel methods.
    pub sigma: Option<f64>,
    pub coarse_pixels: usize,
    pub mask_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    /// Present when the sample has a ground-truth mask and did not fail.
    pub metrics: Option<MetricsReport>,
    pub clustering: Option<ClusterSummary>,
    pub timing: Timing,
    pub error: Option<String>,
}

impl SampleReport {
    pub fn failed(error: String, timing: Timing) -> Self {
        Self { metrics: None, clustering: None, timing, error: Some(error) }
    }
}

/// The nine metrics by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub sa: f64,
    pub sensitivity: f64,
    pub precision: f64,
    pub f1: f64,
    pub mcc: f64,
    pub dice: f64,
    pub jaccard: f64,
    pub specificity: f64,
    pub iou: f64,
}

impl From<[f64; 9]> for MetricValues {
    fn from(v: [f64; 9]) -> Self {
        let [sa, sensitivity, precision, f1, mcc, dice, jaccard, specificity, iou] = v;
        Self { sa, sensitivity, precision, f1, mcc, dice, jaccard, specificity, iou }
    }
}

impl MetricValues {
    /// In [`METRIC_NAMES`] order.
    pub fn values(&self) -> [f64; 9] {
        [
            self.sa,
            self.sensitivity,
            self.precision,
            self.f1,
            self.mcc,
            self.dice,
            self.jaccard,
            self.specificity,
            self.iou,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub samples: usize,
    /// Samples with metrics.
    pub scored: usize,
    pub failed: usize,
    /// Arithmetic mean over scored samples.
    pub mean: Option<MetricValues>,
}

impl Aggregate {
    pub fn over(samples: &BTreeMap<String, SampleReport>) -> Self {
        let scored: Vec<MetricsReport> = samples.values().filter_map(|s| s.metrics).collect();
        Self {
            samples: samples.len(),
            scored: scored.len(),
            failed: samples.values().filter(|s| s.error.is_some()).count(),
            mean: mean_report(&scored).map(MetricValues::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub artifact_version: String,
    pub config: PipelineConfig,
    /// Keyed and ordered by sample id.
    pub samples: BTreeMap<String, SampleReport>,
    pub aggregate: Aggregate,
}

impl RunReport {
    pub fn new(config: PipelineConfig, samples: BTreeMap<String, SampleReport>) -> Self {
        let aggregate = Aggregate::over(&samples);
        Self { artifact_version: ARTIFACT_VERSION.to_owned(), config, samples, aggregate }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
    }

    /// Header, one row per sample, then the mean row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id"];
        header.extend(METRIC_NAMES);
        header.extend(["flags", "error"]);
        w.write_record(&header).expect("in-memory write");
        let blank = || vec![String::new(); 9];
        for (id, s) in &self.samples {
            let mut row = vec![id.clone()];
            match &s.metrics {
                Some(m) => row.extend(m.values().iter().map(f64::to_string)),
                None => row.extend(blank()),
            }
            row.push(s.metrics.map(|m| m.flags.describe()).unwrap_or_default());
            row.push(s.error.clone().unwrap_or_default());
            w.write_record(&row).expect("in-memory write");
        }
        let mut mean = vec![MEAN_ROW.to_owned()];
        match &self.aggregate.mean {
            Some(m) => mean.extend(m.values().iter().map(f64::to_string)),
            None => mean.extend(blank()),
        }
        mean.extend([String::new(), String::new()]);
        w.write_record(&mean).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Writes the requested report files into `dir`.
pub fn emit_report(report: &RunReport, formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        let (name, text) = match f {
            ReportFormat::Json => (REPORT_JSON, report.to_json()),
            ReportFormat::Csv => (REPORT_CSV, report.to_csv()),
        };
        let path = dir.join(name);
        fs::write(&path, text).map_err(Error::io(&path))?;
        written.push(path);
    }
    Ok(written)
}
