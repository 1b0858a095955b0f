//! Batch segmentation over a dataset.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use duskfcm_core::clustering::{ClusterResult, TraceKind};
use duskfcm_core::features::fuse;
use duskfcm_core::metrics::full_report;
use duskfcm_core::overlay::render_overlay;
use duskfcm_core::pipeline::{self, SegmentConfig};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::dataio::{index_dataset, load_mask, load_rgb, save_mask, save_rgb, DatasetIndex, SampleRecord};
use crate::error::{Error, Result};
use crate::report::{emit_report, ClusterSummary, RunReport, SampleReport, Timing};

fn elapsed_ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Worker pool with `jobs` threads, or one per core when `jobs` is 0.
pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

fn write_rows<I, R>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(Error::io(path))
}

/// `pixel` index followed by one column per named feature.
pub fn write_feature_csv<const N: usize>(path: &Path, names: &[&str; N], rows: &[[f64; N]]) -> Result<()> {
    let header: Vec<String> = std::iter::once("pixel").chain(names.iter().copied()).map(String::from).collect();
    let body = rows.iter().enumerate().map(|(k, r)| std::iter::once(k.to_string()).chain(r.iter().map(f64::to_string)));
    write_rows(path, &header, body)
}

pub fn write_trace_csv(path: &Path, result: &ClusterResult) -> Result<()> {
    let value = match result.trace_kind {
        TraceKind::Objective => "objective",
        TraceKind::LogLikelihood => "log_likelihood",
    };
    let header = vec!["iteration".to_owned(), value.to_owned()];
    let body = result.trace.iter().enumerate().map(|(i, v)| [i.to_string(), v.to_string()]);
    write_rows(path, &header, body)
}

fn segment_sample(
    rec: &SampleRecord,
    seg: &SegmentConfig,
    cfg: &PipelineConfig,
    timing: &mut Timing,
) -> Result<(ClusterSummary, Option<duskfcm_core::metrics::MetricsReport>)> {
    let img = load_rgb(&rec.image)?;
    let gt = rec.mask.as_deref().map(load_mask).transpose()?;
    if let Some(g) = &gt {
        if g.dims() != img.dims() {
            return Err(duskfcm_core::Error::DimensionMismatch { expected: img.dims(), found: g.dims() }.into());
        }
    }
    let out = &cfg.output;

    let start = Instant::now();
    let maps = pipeline::feature_maps(&img, seg)?;
    let fm = pipeline::select_and_normalize(fuse(&maps.color, &maps.texture)?, seg)?;
    timing.feature_ms = elapsed_ms(start);
    if cfg.export_features {
        use duskfcm_core::color::COLOR_FEATURE_NAMES;
        use duskfcm_core::texture::TEXTURE_FEATURE_NAMES;
        write_feature_csv(&out.join(format!("{}_texture.csv", rec.id)), &TEXTURE_FEATURE_NAMES, &maps.texture.features)?;
        write_feature_csv(&out.join(format!("{}_color.csv", rec.id)), &COLOR_FEATURE_NAMES, &maps.color.features)?;
    }
    drop(maps);

    let start = Instant::now();
    let coarse = pipeline::cluster(&img, &fm, seg)?;
    timing.cluster_ms = elapsed_ms(start);
    if cfg.export_traces {
        write_trace_csv(&out.join(format!("{}_trace.csv", rec.id)), &coarse.result)?;
    }

    let start = Instant::now();
    let mask = pipeline::refine(&coarse, &fm, seg, img.dims())?;
    timing.refine_ms = elapsed_ms(start);

    let metrics = gt.as_ref().map(|g| full_report(&mask, g)).transpose()?;
    save_mask(&mask, &out.join(format!("{}_mask.png", rec.id)))?;
    save_rgb(&render_overlay(&img, &mask, gt.as_ref())?, &out.join(format!("{}_overlay.png", rec.id)))?;

    let summary = ClusterSummary {
        lesion_cluster: coarse.lesion.cluster,
        ambiguous_lesion: coarse.lesion.ambiguous,
        iterations: coarse.result.iterations,
        converged: coarse.result.converged,
        degenerate: coarse.result.degenerate,
        sigma: coarse.result.sigma,
        coarse_pixels: coarse.mask.count(),
        mask_pixels: mask.count(),
    };
    Ok((summary, metrics))
}

fn process_sample(rec: &SampleRecord, seg: &SegmentConfig, cfg: &PipelineConfig) -> SampleReport {
    let mut timing = Timing::default();
    match segment_sample(rec, seg, cfg, &mut timing) {
        Ok((summary, metrics)) => SampleReport { metrics, clustering: Some(summary), timing, error: None },
        Err(e) => SampleReport::failed(e.to_string(), timing),
    }
}

/// Segments every sample of `index` in parallel and writes masks,
/// overlays and the report files into `cfg.output`. A failing sample is
/// recorded in the report and does not stop the others.
pub fn run_on_index(cfg: &PipelineConfig, index: &DatasetIndex) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).map_err(Error::io(&cfg.output))?;
    let seg = cfg.segment_config();
    let pool = worker_pool(cfg.jobs)?;
    let results: Vec<SampleReport> =
        pool.install(|| index.samples.par_iter().map(|rec| process_sample(rec, &seg, cfg)).collect());
    let samples: BTreeMap<String, SampleReport> =
        index.samples.iter().map(|rec| rec.id.clone()).zip(results).collect();
    let report = RunReport::new(cfg.clone(), samples);
    emit_report(&report, &cfg.formats, &cfg.output)?;
    Ok(report)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    let index = index_dataset(cfg.dataset_root()?)?;
    run_on_index(cfg, &index)
}
