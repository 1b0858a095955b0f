//! Per-image coarse-to-fine segmentation.
//!
//! RGB image → luminance → quantized gray levels → windowed texture map,
//! plus windowed color moments → fused feature matrix (optionally reduced
//! to a frozen feature subset) → z-scores → clustering → lesion cluster
//! by redness → argmax mask → refinement.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{self, defuzzify, select_lesion_cluster, ClusterConfig, ClusterResult, LesionChoice, Method};
use crate::color::{color_feature_map, ColorMap};
use crate::features::{fuse, zscore, FeatureMatrix};
use crate::image::{BinaryMask, RgbImage};
use crate::refine::{Identity, MaskRefiner, RefineConfig, RefineContext, RegionGrow};
use crate::texture::{windowed_texture_map, GlcmConfig, TextureMap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinerKind {
    RegionGrow,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub method: Method,
    pub cluster: ClusterConfig,
    pub glcm: GlcmConfig,
    pub color_window: usize,
    pub refiner: RefinerKind,
    pub refine: RefineConfig,
    /// Frozen feature subset (column names); `None` keeps all 31.
    pub selected_features: Option<Vec<String>>,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            method: Method::Duskfcm,
            cluster: ClusterConfig::default(),
            glcm: GlcmConfig::default(),
            color_window: 5,
            refiner: RefinerKind::RegionGrow,
            refine: RefineConfig::default(),
            selected_features: None,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        self.cluster.validate()?;
        self.glcm.validate()?;
        if self.glcm.window < 3 {
            return Err(Error::BadWindow(self.glcm.window));
        }
        if self.color_window == 0 || self.color_window % 2 == 0 {
            return Err(Error::BadWindow(self.color_window));
        }
        self.refine.validate()?;
        if matches!(&self.selected_features, Some(s) if s.is_empty()) {
            return Err(Error::InvalidConfig("selected feature list is empty"));
        }
        Ok(())
    }
}

/// Per-pixel color and texture descriptors before fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    pub color: ColorMap,
    pub texture: TextureMap,
}

pub fn feature_maps(img: &RgbImage, cfg: &SegmentConfig) -> Result<FeatureMaps> {
    let quantized = img.to_grayscale().quantize(cfg.glcm.levels)?;
    let texture = windowed_texture_map(&quantized, &cfg.glcm)?;
    let color = color_feature_map(img, cfg.color_window)?;
    Ok(FeatureMaps { color, texture })
}

/// Fused color + texture matrix of all 31 columns, not normalized.
pub fn fused_features(img: &RgbImage, cfg: &SegmentConfig) -> Result<FeatureMatrix> {
    let maps = feature_maps(img, cfg)?;
    fuse(&maps.color, &maps.texture)
}

/// Frozen subset (if any) of a fused matrix, z-scored.
pub fn select_and_normalize(fused: FeatureMatrix, cfg: &SegmentConfig) -> Result<FeatureMatrix> {
    let selected = match &cfg.selected_features {
        Some(names) => fused.select_named(names)?,
        None => fused,
    };
    Ok(zscore(&selected))
}

/// Clustering input: frozen subset (if any) of the fused matrix, z-scored.
pub fn extract_features(img: &RgbImage, cfg: &SegmentConfig) -> Result<FeatureMatrix> {
    select_and_normalize(fused_features(img, cfg)?, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coarse {
    pub result: ClusterResult,
    pub lesion: LesionChoice,
    pub mask: BinaryMask,
}

pub fn cluster(img: &RgbImage, fm: &FeatureMatrix, cfg: &SegmentConfig) -> Result<Coarse> {
    let dims = img.dims();
    let result = clustering::fit(cfg.method, fm, &cfg.cluster, dims)?;
    let labels = defuzzify(&result, dims)?;
    let lesion = select_lesion_cluster(&result, img, &labels)?;
    let mask = labels.mask_of(lesion.cluster);
    Ok(Coarse { result, lesion, mask })
}

pub fn refine(coarse: &Coarse, fm: &FeatureMatrix, cfg: &SegmentConfig, dims: (usize, usize)) -> Result<BinaryMask> {
    let ctx = RefineContext { coarse: &coarse.result, lesion_cluster: coarse.lesion.cluster, features: fm, dims };
    match cfg.refiner {
        RefinerKind::RegionGrow => RegionGrow(cfg.refine.clone()).refine(&coarse.mask, &ctx),
        RefinerKind::None => Identity.refine(&coarse.mask, &ctx),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub coarse: Coarse,
    pub mask: BinaryMask,
}

/// Runs every stage on one image.
pub fn segment(img: &RgbImage, cfg: &SegmentConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let fm = extract_features(img, cfg)?;
    let coarse = cluster(img, &fm, cfg)?;
    let mask = refine(&coarse, &fm, cfg, img.dims())?;
    Ok(Segmentation { coarse, mask })
}

/// Up to `max_rows` seeded rows of `fm` with their mask labels, in
/// ascending row order.
pub fn sample_labeled_rows(
    fm: &FeatureMatrix,
    mask: &BinaryMask,
    max_rows: usize,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<bool>)> {
    if fm.rows() != mask.len() {
        return Err(Error::NotAnImageGrid { rows: fm.rows(), width: mask.width(), height: mask.height() });
    }
    let rows: Vec<usize> = if fm.rows() <= max_rows {
        (0..fm.rows()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, fm.rows(), max_rows).into_vec();
        picked.sort_unstable();
        picked
    };
    let labels = rows.iter().map(|&k| mask.as_slice()[k]).collect();
    Ok((fm.select_rows(&rows), labels))
}
