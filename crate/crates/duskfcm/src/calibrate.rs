//! Supervised feature-subset calibration.

use duskfcm_core::features::{cfs_select, zscore, FeatureMatrix};
use duskfcm_core::pipeline::{fused_features, sample_labeled_rows};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataio::{load_mask, load_rgb, DatasetIndex};
use crate::error::{Error, Result};
use crate::runner::worker_pool;

/// Rows drawn from each image by default.
pub const DEFAULT_ROWS_PER_IMAGE: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub selected_features: Vec<String>,
    pub merit: f64,
    /// Images that contributed rows.
    pub images: usize,
    pub rows: usize,
}

/// Runs CFS over per-image z-scored fused features of every sample that
/// has a mask, `rows_per_image` seeded rows from each.
pub fn calibrate(cfg: &PipelineConfig, index: &DatasetIndex, rows_per_image: usize) -> Result<Calibration> {
    let mut seg = cfg.segment_config();
    seg.selected_features = None;
    seg.validate()?;
    let labeled: Vec<_> = index.samples.iter().enumerate().filter(|(_, s)| s.mask.is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::Config("calibration needs samples with masks".into()));
    }
    let pool = worker_pool(cfg.jobs)?;
    let parts: Vec<(FeatureMatrix, Vec<bool>)> = pool.install(|| {
        labeled
            .par_iter()
            .map(|(i, rec)| -> Result<_> {
                let img = load_rgb(&rec.image)?;
                let mask = load_mask(rec.mask.as_deref().expect("filtered on mask"))?;
                let fm = zscore(&fused_features(&img, &seg)?);
                Ok(sample_labeled_rows(&fm, &mask, rows_per_image, cfg.seed.wrapping_add(*i as u64))?)
            })
            .collect::<Result<_>>()
    })?;
    let (matrices, labels): (Vec<FeatureMatrix>, Vec<Vec<bool>>) = parts.into_iter().unzip();
    let all = FeatureMatrix::vstack(&matrices)?;
    let labels: Vec<bool> = labels.concat();
    let sel = cfs_select(&all, &labels)?;
    Ok(Calibration { selected_features: sel.names(&all), merit: sel.merit, images: matrices.len(), rows: all.rows() })
}
