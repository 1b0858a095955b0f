//! Method comparison over one dataset.

use std::fs;
use std::path::Path;

use duskfcm_core::clustering::Method;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataio::index_dataset;
use crate::error::{Error, Result};
use crate::report::MetricValues;
use crate::runner::run_on_index;

pub const BENCH_JSON: &str = "bench.json";
pub const BENCH_CSV: &str = "bench.csv";

/// Aggregate columns of the comparison table, in order.
pub const BENCH_COLUMNS: [&str; 9] =
    ["accuracy", "precision", "iou", "dice", "sensitivity", "specificity", "f1", "jaccard", "mcc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub samples: usize,
    pub failed: usize,
    pub mean: Option<MetricValues>,
}

impl BenchRow {
    /// Values in [`BENCH_COLUMNS`] order.
    pub fn columns(&self) -> Option<[f64; 9]> {
        self.mean.map(|m| [m.sa, m.precision, m.iou, m.dice, m.sensitivity, m.specificity, m.f1, m.jaccard, m.mcc])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = ["method"].into_iter().chain(BENCH_COLUMNS).chain(["samples", "failed"]).collect();
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.method.to_string()];
            match r.columns() {
                Some(v) => rec.extend(v.iter().map(f64::to_string)),
                None => rec.extend(vec![String::new(); BENCH_COLUMNS.len()]),
            }
            rec.extend([r.samples.to_string(), r.failed.to_string()]);
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Fixed-width text table with four decimals.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<8}", "method");
        for c in BENCH_COLUMNS {
            out += &format!(" {c:>11}");
        }
        out += &format!(" {:>7}\n", "failed");
        for r in &self.rows {
            out += &format!("{:<8}", r.method.name());
            match r.columns() {
                Some(v) => v.iter().for_each(|x| out += &format!(" {x:>11.4}")),
                None => BENCH_COLUMNS.iter().for_each(|_| out += &format!(" {:>11}", "-")),
            }
            out += &format!(" {:>7}\n", r.failed);
        }
        out
    }
}

/// One full run per method, each writing into `<output>/<method>`; a
/// method listed again gets a numbered directory.
pub fn benchmark_compare(cfg: &PipelineConfig, methods: &[Method]) -> Result<BenchTable> {
    if methods.len() < 2 {
        return Err(Error::BadMethodList(methods.len()));
    }
    cfg.validate()?;
    let index = index_dataset(cfg.dataset_root()?)?;
    let mut rows = Vec::with_capacity(methods.len());
    for (i, &method) in methods.iter().enumerate() {
        let repeat = methods[..i].iter().filter(|&&m| m == method).count();
        let dir = if repeat == 0 { method.name().to_owned() } else { format!("{}-{}", method.name(), repeat + 1) };
        let run_cfg = PipelineConfig { method, output: cfg.output.join(dir), ..cfg.clone() };
        let report = run_on_index(&run_cfg, &index)?;
        let agg = report.aggregate;
        rows.push(BenchRow { method, samples: agg.samples, failed: agg.failed, mean: agg.mean });
    }
    let table = BenchTable { rows };
    write_bench(&table, &cfg.output)?;
    Ok(table)
}

fn write_bench(table: &BenchTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let json = dir.join(BENCH_JSON);
    let mut text = serde_json::to_string_pretty(table).expect("table serializes");
    text.push('\n');
    fs::write(&json, text).map_err(Error::io(&json))?;
    let csv = dir.join(BENCH_CSV);
    fs::write(&csv, table.to_csv()).map_err(Error::io(&csv))
}
