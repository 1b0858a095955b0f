//! Gray-level co-occurrence matrices and the 22-value texture descriptor.
//!
//! Offsets are `(dx, dy)` with `dx` along columns and `dy` along rows; a
//! pair is `(img[y][x], img[y + dy][x + dx])`. Gray levels enter the
//! statistics as zero-based indices.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::image::QuantizedImage;
use crate::math::{self, plogp};
use crate::{Error, Result};

pub const TEXTURE_FEATURE_COUNT: usize = 22;

/// Public index -> name mapping of [`TextureFeatures::values`].
pub const TEXTURE_FEATURE_NAMES: [&str; TEXTURE_FEATURE_COUNT] = [
    "autocorrelation",
    "contrast",
    "correlation_1",
    "correlation_2",
    "cluster_prominence",
    "cluster_shade",
    "dissimilarity",
    "energy",
    "entropy",
    "homogeneity_1",
    "homogeneity_2",
    "maximum_probability",
    "sum_of_squares_variance",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "difference_variance",
    "difference_entropy",
    "information_correlation_1",
    "information_correlation_2",
    "inverse_difference_normalized",
    "inverse_difference_moment_normalized",
];

pub mod index {
    pub const AUTOCORRELATION: usize = 0;
    pub const CONTRAST: usize = 1;
    pub const CORRELATION_1: usize = 2;
    pub const CORRELATION_2: usize = 3;
    pub const CLUSTER_PROMINENCE: usize = 4;
    pub const CLUSTER_SHADE: usize = 5;
    pub const DISSIMILARITY: usize = 6;
    pub const ENERGY: usize = 7;
    pub const ENTROPY: usize = 8;
    pub const HOMOGENEITY_1: usize = 9;
    pub const HOMOGENEITY_2: usize = 10;
    pub const MAXIMUM_PROBABILITY: usize = 11;
    pub const SUM_OF_SQUARES_VARIANCE: usize = 12;
    pub const SUM_AVERAGE: usize = 13;
    pub const SUM_VARIANCE: usize = 14;
    pub const SUM_ENTROPY: usize = 15;
    pub const DIFFERENCE_VARIANCE: usize = 16;
    pub const DIFFERENCE_ENTROPY: usize = 17;
    pub const INFORMATION_CORRELATION_1: usize = 18;
    pub const INFORMATION_CORRELATION_2: usize = 19;
    pub const INVERSE_DIFFERENCE_NORMALIZED: usize = 20;
    pub const INVERSE_DIFFERENCE_MOMENT_NORMALIZED: usize = 21;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlcmConfig {
    pub levels: usize,
    pub offsets: Vec<(i32, i32)>,
    pub symmetric: bool,
    /// Odd side of the per-pixel window; 0 means whole-image only.
    pub window: usize,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self { levels: 8, offsets: vec![(1, 0), (0, 1), (1, 1), (1, -1)], symmetric: true, window: 11 }
    }
}

impl GlcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=256).contains(&self.levels) {
            return Err(Error::BadLevelCount(self.levels));
        }
        if self.offsets.is_empty() {
            return Err(Error::NoOffsets);
        }
        if self.window != 0 && self.window % 2 == 0 {
            return Err(Error::BadWindow(self.window));
        }
        Ok(())
    }
}

/// Normalized co-occurrence matrix, row-major `levels x levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    pub levels: usize,
    pub p: Vec<f64>,
    /// Pairs counted, transposed pairs included when symmetric.
    pub pair_count: u64,
}

impl Glcm {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.levels + j]
    }

    fn from_counts(levels: usize, counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        let t = total as f64;
        Self { levels, p: counts.iter().map(|&c| c as f64 / t).collect(), pair_count: total }
    }
}

/// Raw pair counts (row-major `levels x levels`) for one displacement.
pub fn cooccurrence_counts(img: &QuantizedImage, offset: (i32, i32), symmetric: bool) -> Result<Vec<u64>> {
    let levels = img.levels();
    let mut counts = vec![0u64; levels * levels];
    let added = accumulate(img.as_raw(), img.width(), img.height(), levels, offset, symmetric, &mut counts);
    if added == 0 {
        return Err(Error::OffsetTooLarge { dx: offset.0, dy: offset.1 });
    }
    Ok(counts)
}

/// Ranges of anchor coordinates whose displaced partner stays inside `[0, extent)`.
#[inline]
fn anchor_range(extent: usize, shift: i32) -> core::ops::Range<usize> {
    let s = shift.unsigned_abs() as usize;
    if s >= extent {
        return 0..0;
    }
    if shift >= 0 {
        0..extent - s
    } else {
        s..extent
    }
}

/// Adds pair counts of the `w`x`h` block stored with row `stride` in `data`.
fn accumulate_block(
    data: &[u16],
    stride: usize,
    w: usize,
    h: usize,
    levels: usize,
    (dx, dy): (i32, i32),
    symmetric: bool,
    counts: &mut [u64],
) -> u64 {
    let xs = anchor_range(w, dx);
    let ys = anchor_range(h, dy);
    let mut added = 0u64;
    for y in ys {
        let row = y * stride;
        let prow = (y as isize + dy as isize) as usize * stride;
        for x in xs.clone() {
            let a = data[row + x] as usize;
            let b = data[prow + (x as isize + dx as isize) as usize] as usize;
            counts[a * levels + b] += 1;
            added += 1;
            if symmetric {
                counts[b * levels + a] += 1;
                added += 1;
            }
        }
    }
    added
}

fn accumulate(
    data: &[u16],
    w: usize,
    h: usize,
    levels: usize,
    offset: (i32, i32),
    symmetric: bool,
    counts: &mut [u64],
) -> u64 {
    accumulate_block(data, w, w, h, levels, offset, symmetric, counts)
}

/// Normalized GLCM of the whole image for `cfg.offsets[offset_index]`.
pub fn compute_glcm(img: &QuantizedImage, cfg: &GlcmConfig, offset_index: usize) -> Result<Glcm> {
    cfg.validate()?;
    if img.levels() != cfg.levels {
        return Err(Error::InvalidConfig("image level count differs from GLCM level count"));
    }
    let offset = *cfg.offsets.get(offset_index).ok_or(Error::InvalidConfig("offset index out of range"))?;
    let counts = cooccurrence_counts(img, offset, cfg.symmetric)?;
    Ok(Glcm::from_counts(cfg.levels, &counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureFeatures {
    pub values: [f64; TEXTURE_FEATURE_COUNT],
    /// A marginal had zero variance; both correlation values were set to 0.
    pub degenerate: bool,
}

impl TextureFeatures {
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// Scratch buffers reused across many GLCMs of the same level count.
struct FeatureScratch {
    px: Vec<f64>,
    py: Vec<f64>,
    sum: Vec<f64>,
    diff: Vec<f64>,
}

impl FeatureScratch {
    fn new(levels: usize) -> Self {
        Self { px: vec![0.0; levels], py: vec![0.0; levels], sum: vec![0.0; 2 * levels - 1], diff: vec![0.0; levels] }
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// The 22 texture statistics of a normalized GLCM, natural-log entropies.
pub fn texture_features(glcm: &Glcm) -> TextureFeatures {
    let mut scratch = FeatureScratch::new(glcm.levels);
    features_with(glcm.levels, &glcm.p, &mut scratch)
}

fn features_with(levels: usize, p: &[f64], s: &mut FeatureScratch) -> TextureFeatures {
    let l = levels;
    s.px.iter_mut().for_each(|v| *v = 0.0);
    s.py.iter_mut().for_each(|v| *v = 0.0);
    s.sum.iter_mut().for_each(|v| *v = 0.0);
    s.diff.iter_mut().for_each(|v| *v = 0.0);

    let mut autocorrelation = 0.0;
    let mut contrast = 0.0;
    let mut dissimilarity = 0.0;
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut homogeneity_1 = 0.0;
    let mut homogeneity_2 = 0.0;
    let mut max_prob = 0.0f64;
    let mut inn = 0.0;
    let mut idmn = 0.0;
    let lf = l as f64;
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            if v == 0.0 {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let d = i.abs_diff(j);
            let df = d as f64;
            s.px[i] += v;
            s.py[j] += v;
            s.sum[i + j] += v;
            s.diff[d] += v;
            autocorrelation += fi * fj * v;
            contrast += df * df * v;
            dissimilarity += df * v;
            energy += v * v;
            entropy += plogp(v);
            homogeneity_1 += v / (1.0 + df);
            homogeneity_2 += v / (1.0 + df * df);
            max_prob = max_prob.max(v);
            inn += v / (1.0 + df / lf);
            idmn += v / (1.0 + (df * df) / (lf * lf));
        }
    }

    let mean_x: f64 = s.px.iter().enumerate().map(|(i, &v)| i as f64 * v).sum();
    let mean_y: f64 = s.py.iter().enumerate().map(|(j, &v)| j as f64 * v).sum();
    let var_x: f64 = s.px.iter().enumerate().map(|(i, &v)| sq(i as f64 - mean_x) * v).sum();
    let var_y: f64 = s.py.iter().enumerate().map(|(j, &v)| sq(j as f64 - mean_y) * v).sum();
    let std_prod = math::sqrt(var_x) * math::sqrt(var_y);
    let degenerate = !(std_prod > 1e-12);

    let mut centered = 0.0;
    let mut prominence = 0.0;
    let mut shade = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..l {
        for j in 0..l {
            let v = p[i * l + j];
            let (fi, fj) = (i as f64, j as f64);
            let pxy = s.px[i] * s.py[j];
            if pxy > 0.0 {
                hxy2 += plogp(pxy);
                if v > 0.0 {
                    hxy1 -= v * math::ln(pxy);
                }
            }
            if v == 0.0 {
                continue;
            }
            centered += (fi - mean_x) * (fj - mean_y) * v;
            let t = fi + fj - mean_x - mean_y;
            prominence += t * t * t * t * v;
            shade += t * t * t * v;
        }
    }
    let (correlation_1, correlation_2) = if degenerate {
        (0.0, 0.0)
    } else {
        (centered / std_prod, (autocorrelation - mean_x * mean_y) / std_prod)
    };

    let sum_average: f64 = s.sum.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let sum_variance: f64 = s.sum.iter().enumerate().map(|(k, &v)| sq(k as f64 - sum_average) * v).sum();
    let sum_entropy: f64 = s.sum.iter().map(|&v| plogp(v)).sum();
    let diff_mean: f64 = s.diff.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let diff_variance: f64 = s.diff.iter().enumerate().map(|(k, &v)| sq(k as f64 - diff_mean) * v).sum();
    let diff_entropy: f64 = s.diff.iter().map(|&v| plogp(v)).sum();

    let hx: f64 = s.px.iter().map(|&v| plogp(v)).sum();
    let hy: f64 = s.py.iter().map(|&v| plogp(v)).sum();
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 { (entropy - hxy1) / hmax } else { 0.0 };
    let imc2 = math::sqrt((1.0 - math::exp(-2.0 * (hxy2 - entropy))).max(0.0));

    TextureFeatures {
        values: [
            autocorrelation,
            contrast,
            correlation_1,
            correlation_2,
            prominence,
            shade,
            dissimilarity,
            energy,
            entropy,
            homogeneity_1,
            homogeneity_2,
            max_prob,
            var_x,
            sum_average,
            sum_variance,
            sum_entropy,
            diff_variance,
            diff_entropy,
            imc1,
            imc2,
            inn,
            idmn,
        ],
        degenerate,
    }
}

/// Element-wise mean of per-offset descriptors, summed in list order.
pub fn average_over_offsets(list: &[TextureFeatures]) -> Result<TextureFeatures> {
    let first = list.first().ok_or(Error::EmptyList)?;
    if list.len() == 1 {
        return Ok(*first);
    }
    let mut values = [0.0; TEXTURE_FEATURE_COUNT];
    let mut degenerate = false;
    for f in list {
        for (acc, v) in values.iter_mut().zip(&f.values) {
            *acc += v;
        }
        degenerate |= f.degenerate;
    }
    let n = list.len() as f64;
    values.iter_mut().for_each(|v| *v /= n);
    Ok(TextureFeatures { values, degenerate })
}

/// Offset-averaged descriptor of the whole image.
pub fn global_texture(img: &QuantizedImage, cfg: &GlcmConfig) -> Result<TextureFeatures> {
    let per: Result<Vec<_>> =
        (0..cfg.offsets.len()).map(|k| compute_glcm(img, cfg, k).map(|g| texture_features(&g))).collect();
    average_over_offsets(&per?)
}

/// Per-pixel texture descriptors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureMap {
    pub width: usize,
    pub height: usize,
    pub features: Vec<[f64; TEXTURE_FEATURE_COUNT]>,
}

/// Descriptor of the `cfg.window` square centred on each pixel, with the
/// image edge-replicated so border pixels see a full window.
pub fn windowed_texture_map(img: &QuantizedImage, cfg: &GlcmConfig) -> Result<TextureMap> {
    cfg.validate()?;
    let w = cfg.window;
    if w < 3 || w % 2 == 0 {
        return Err(Error::BadWindow(w));
    }
    if img.levels() != cfg.levels {
        return Err(Error::InvalidConfig("image level count differs from GLCM level count"));
    }
    let (width, height) = (img.width(), img.height());
    if w > width || w > height {
        return Err(Error::WindowLargerThanImage { window: w, width, height });
    }
    for &(dx, dy) in &cfg.offsets {
        if anchor_range(w, dx).is_empty() || anchor_range(w, dy).is_empty() {
            return Err(Error::OffsetTooLarge { dx, dy });
        }
    }

    let r = w / 2;
    let pw = width + 2 * r;
    let ph = height + 2 * r;
    let mut padded = vec![0u16; pw * ph];
    for py in 0..ph {
        let sy = crate::image::clamp_coord(py as isize - r as isize, height);
        for px in 0..pw {
            let sx = crate::image::clamp_coord(px as isize - r as isize, width);
            padded[py * pw + px] = img.get(sx, sy);
        }
    }

    let l = cfg.levels;
    let mut counts = vec![0u64; l * l];
    let mut probs = vec![0.0f64; l * l];
    let mut scratch = FeatureScratch::new(l);
    let mut per_offset: Vec<TextureFeatures> = Vec::with_capacity(cfg.offsets.len());
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            per_offset.clear();
            let base = y * pw + x;
            for &off in &cfg.offsets {
                counts.iter_mut().for_each(|c| *c = 0);
                let total = accumulate_block(&padded[base..], pw, w, w, l, off, cfg.symmetric, &mut counts);
                let t = total as f64;
                for (p, &c) in probs.iter_mut().zip(&counts) {
                    *p = c as f64 / t;
                }
                per_offset.push(features_with(l, &probs, &mut scratch));
            }
            out.push(average_over_offsets(&per_offset)?.values);
        }
    }
    Ok(TextureMap { width, height, features: out })
}
