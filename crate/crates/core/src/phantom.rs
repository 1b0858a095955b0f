//! Seeded synthetic lesion images with known ground truth.
//!
//! An intensity plane holds a disk (foreground level) on a flat background,
//! corrupted by additive Gaussian noise and then salt-and-pepper noise. The
//! plane is tinted into RGB with per-channel gains so brighter pixels are
//! also redder.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::image::{BinaryMask, RgbImage};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomConfig {
    pub width: usize,
    pub height: usize,
    /// Disk centre in pixels; `None` uses the image centre.
    pub center: Option<(f64, f64)>,
    /// `None` uses a quarter of the shorter side.
    pub radius: Option<f64>,
    pub foreground: f64,
    pub background: f64,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_sigma: f64,
    /// Fraction of pixels replaced by 0 or 255.
    pub salt_pepper: f64,
    /// Channel gains applied to the intensity plane.
    pub tint: [f64; 3],
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            center: None,
            radius: None,
            foreground: 200.0,
            background: 80.0,
            noise_sigma: 20.0,
            salt_pepper: 0.05,
            tint: [1.0, 0.55, 0.45],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: RgbImage,
    pub mask: BinaryMask,
}

pub fn disk_phantom(cfg: &PhantomConfig) -> Result<Phantom> {
    let (w, h) = (cfg.width, cfg.height);
    if w == 0 || h == 0 {
        return Err(Error::BadDimensions { width: w, height: h, len: 0 });
    }
    if !(0.0..=1.0).contains(&cfg.salt_pepper) || !(cfg.noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig("phantom noise parameters out of range"));
    }
    let (cx, cy) = cfg.center.unwrap_or(((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0));
    let radius = cfg.radius.unwrap_or(w.min(h) as f64 / 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|_| Error::InvalidConfig("noise sigma"))?;

    let mut mask = Vec::with_capacity(w * h);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let inside = math::sqrt(dx * dx + dy * dy) <= radius;
            mask.push(inside);
            let base = if inside { cfg.foreground } else { cfg.background };
            let mut v = base + noise.sample(&mut rng);
            if rng.random::<f64>() < cfg.salt_pepper {
                v = if rng.random_bool(0.5) { 255.0 } else { 0.0 };
            }
            let v = v.clamp(0.0, 255.0);
            for gain in cfg.tint {
                rgb.push(math::round(v * gain).clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(Phantom { image: RgbImage::new(w, h, rgb)?, mask: BinaryMask::new(w, h, mask)? })
}

/// The `index`-th phantom of a seeded set: disk position and radius vary.
pub fn phantom_set_member(base: &PhantomConfig, index: usize) -> PhantomConfig {
    let seed = base.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let short = base.width.min(base.height) as f64;
    let radius = short * rng.random_range(0.18..0.3);
    let cx = rng.random_range(radius + 2.0..base.width as f64 - radius - 2.0);
    let cy = rng.random_range(radius + 2.0..base.height as f64 - radius - 2.0);
    PhantomConfig { center: Some((cx, cy)), radius: Some(radius), seed, ..base.clone() }
}
