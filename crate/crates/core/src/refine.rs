//! Refinement of a coarse lesion mask: seeded region growing, morphological
//! closing and removal of small 4-connected components.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clustering::{defuzzify, ClusterResult};
use crate::features::FeatureMatrix;
use crate::image::BinaryMask;
use crate::math::sq_dist;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Largest root-mean-square per-feature distance from the running
    /// region mean, in z-score units.
    pub grow_threshold: f64,
    /// Components smaller than this are dropped; `None` = 0.1% of the image.
    pub min_area: Option<usize>,
    pub closing_radius: usize,
    /// Lesion pixels at or above this quantile of lesion membership seed the growth.
    pub seed_quantile: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { grow_threshold: 1.5, min_area: None, closing_radius: 2, seed_quantile: 0.9 }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grow_threshold >= 0.0) {
            return Err(Error::InvalidConfig("grow threshold must be >= 0"));
        }
        if !(self.seed_quantile > 0.0 && self.seed_quantile <= 1.0) {
            return Err(Error::InvalidConfig("seed quantile must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn min_area_for(&self, pixels: usize) -> usize {
        self.min_area.unwrap_or_else(|| pixels.div_ceil(1000))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub id: usize,
    pub area: usize,
    pub bbox: BoundingBox,
    /// Mean of the supplied per-pixel membership, when one was given.
    pub mean_membership: Option<f64>,
}

/// In-bounds 4-neighbours in row-major order: up, left, right, down.
#[inline]
fn neighbors4(k: usize, width: usize, height: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (k % width, k / width);
    [
        (y > 0).then(|| k - width),
        (x > 0).then(|| k - 1),
        (x + 1 < width).then(|| k + 1),
        (y + 1 < height).then(|| k + width),
    ]
    .into_iter()
    .flatten()
}

/// Component label per pixel (`usize::MAX` for background), numbered in
/// row-major order of first pixel.
pub fn label_components(mask: &BinaryMask) -> (Vec<usize>, usize) {
    let (w, h) = mask.dims();
    let data = mask.as_slice();
    let mut labels = vec![usize::MAX; data.len()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..data.len() {
        if !data[start] || labels[start] != usize::MAX {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            for nb in neighbors4(k, w, h) {
                if data[nb] && labels[nb] == usize::MAX {
                    labels[nb] = next;
                    queue.push_back(nb);
                }
            }
        }
        next += 1;
    }
    (labels, next)
}

pub fn component_stats(mask: &BinaryMask, membership: Option<&[f64]>) -> Vec<ComponentStats> {
    let w = mask.width();
    let (labels, count) = label_components(mask);
    let mut stats: Vec<ComponentStats> = (0..count)
        .map(|id| ComponentStats {
            id,
            area: 0,
            bbox: BoundingBox { x0: usize::MAX, y0: usize::MAX, x1: 0, y1: 0 },
            mean_membership: membership.map(|_| 0.0),
        })
        .collect();
    for (k, &l) in labels.iter().enumerate() {
        if l == usize::MAX {
            continue;
        }
        let s = &mut stats[l];
        let (x, y) = (k % w, k / w);
        s.area += 1;
        s.bbox.x0 = s.bbox.x0.min(x);
        s.bbox.y0 = s.bbox.y0.min(y);
        s.bbox.x1 = s.bbox.x1.max(x);
        s.bbox.y1 = s.bbox.y1.max(y);
        if let (Some(acc), Some(u)) = (s.mean_membership.as_mut(), membership) {
            *acc += u[k];
        }
    }
    for s in &mut stats {
        if let Some(acc) = s.mean_membership.as_mut() {
            *acc /= s.area as f64;
        }
    }
    stats
}

/// Breadth-first 4-connected growth from `seeds`. A pixel joins when the
/// root-mean-square per-feature distance between its feature vector and the
/// current region mean is at most `cfg.grow_threshold`. Seeds are queued in
/// row-major order; neighbours are visited up, left, right, down.
pub fn region_grow(fm: &FeatureMatrix, seeds: &BinaryMask, cfg: &RefineConfig, dims: (usize, usize)) -> Result<BinaryMask> {
    cfg.validate()?;
    let (w, h) = dims;
    if seeds.dims() != dims {
        return Err(Error::DimensionMismatch { expected: dims, found: seeds.dims() });
    }
    if fm.rows() != w * h {
        return Err(Error::NotAnImageGrid { rows: fm.rows(), width: w, height: h });
    }
    let d = fm.cols();
    let mut region = seeds.clone();
    let mut sum = vec![0.0; d];
    let mut count = 0usize;
    let mut queue = VecDeque::new();
    for (k, _) in seeds.as_slice().iter().enumerate().filter(|(_, &s)| s) {
        for (acc, x) in sum.iter_mut().zip(fm.row(k)) {
            *acc += x;
        }
        count += 1;
        queue.push_back(k);
    }
    if count == 0 {
        return Err(Error::EmptySeeds);
    }
    let limit = cfg.grow_threshold * cfg.grow_threshold * d as f64;
    let mut mean = vec![0.0; d];
    while let Some(k) = queue.pop_front() {
        for nb in neighbors4(k, w, h) {
            if region.as_slice()[nb] {
                continue;
            }
            let inv = 1.0 / count as f64;
            for (m, s) in mean.iter_mut().zip(&sum) {
                *m = s * inv;
            }
            if sq_dist(fm.row(nb), &mean) <= limit {
                region.as_mut_slice()[nb] = true;
                for (acc, x) in sum.iter_mut().zip(fm.row(nb)) {
                    *acc += x;
                }
                count += 1;
                queue.push_back(nb);
            }
        }
    }
    Ok(region)
}

/// Clears 4-connected foreground components with fewer than `min_area` pixels.
pub fn remove_small_components(mask: &BinaryMask, min_area: usize) -> BinaryMask {
    let (labels, count) = label_components(mask);
    let mut areas = vec![0usize; count];
    for &l in labels.iter().filter(|&&l| l != usize::MAX) {
        areas[l] += 1;
    }
    let mut out = mask.clone();
    for (px, &l) in out.as_mut_slice().iter_mut().zip(&labels) {
        if l != usize::MAX && areas[l] < min_area {
            *px = false;
        }
    }
    out
}

fn disk(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let r2 = r * r;
    (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).filter(|&(dx, dy)| dx * dx + dy * dy <= r2).collect()
}

/// Dilation then erosion by a disk. Dilation is clipped to the image and
/// erosion treats outside pixels as foreground, so closing is extensive
/// and idempotent up to the border.
pub fn morphological_close(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    let se = disk(radius);
    let mut dilated = BinaryMask::empty(w, h).expect("dimensions already valid");
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for &(dx, dy) in &se {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    dilated.set(nx as usize, ny as usize, true);
                }
            }
        }
    }
    let mut closed = BinaryMask::empty(w, h).expect("dimensions already valid");
    for y in 0..h {
        for x in 0..w {
            let keep = se.iter().all(|&(dx, dy)| {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h || dilated.get(nx as usize, ny as usize)
            });
            closed.set(x, y, keep);
        }
    }
    closed
}

/// Membership value at quantile `q` (nearest rank) of the given values.
fn nearest_rank(values: &mut [f64], q: f64) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let rank = libm::ceil(q * values.len() as f64) as usize;
    values[rank.clamp(1, values.len()) - 1]
}

/// Seeds from the most confident lesion pixels, then grow, close and prune.
pub fn refine_mask(
    coarse: &ClusterResult,
    lesion_cluster: usize,
    fm: &FeatureMatrix,
    cfg: &RefineConfig,
    dims: (usize, usize),
) -> Result<BinaryMask> {
    cfg.validate()?;
    if lesion_cluster >= coarse.memberships.c {
        return Err(Error::InvalidConfig("lesion cluster index out of range"));
    }
    let labels = defuzzify(coarse, dims)?;
    let u = &coarse.memberships;
    let lesion: Vec<usize> = (0..u.n).filter(|&k| labels.labels[k] == lesion_cluster).collect();
    if lesion.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let mut values: Vec<f64> = lesion.iter().map(|&k| u.get(lesion_cluster, k)).collect();
    let threshold = nearest_rank(&mut values, cfg.seed_quantile);
    let mut seeds = BinaryMask::empty(dims.0, dims.1)?;
    for &k in &lesion {
        if u.get(lesion_cluster, k) >= threshold {
            seeds.as_mut_slice()[k] = true;
        }
    }
    let grown = region_grow(fm, &seeds, cfg, dims)?;
    let closed = morphological_close(&grown, cfg.closing_radius);
    Ok(remove_small_components(&closed, cfg.min_area_for(dims.0 * dims.1)))
}

/// Everything a refinement stage may look at.
pub struct RefineContext<'a> {
    pub coarse: &'a ClusterResult,
    pub lesion_cluster: usize,
    pub features: &'a FeatureMatrix,
    pub dims: (usize, usize),
}

/// Mask in, mask out. Lets another refiner replace region growing.
pub trait MaskRefiner {
    fn refine(&self, coarse_mask: &BinaryMask, ctx: &RefineContext<'_>) -> Result<BinaryMask>;
}

/// Passes the coarse mask through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl MaskRefiner for Identity {
    fn refine(&self, coarse_mask: &BinaryMask, _ctx: &RefineContext<'_>) -> Result<BinaryMask> {
        Ok(coarse_mask.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegionGrow(pub RefineConfig);

impl MaskRefiner for RegionGrow {
    fn refine(&self, _coarse_mask: &BinaryMask, ctx: &RefineContext<'_>) -> Result<BinaryMask> {
        refine_mask(ctx.coarse, ctx.lesion_cluster, ctx.features, &self.0, ctx.dims)
    }
}
