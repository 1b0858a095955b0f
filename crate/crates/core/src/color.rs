//! Per-band color histograms and per-pixel color moments.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::image::{clamp_coord, RgbImage};
use crate::math;
use crate::{Error, Result};

pub const COLOR_FEATURE_COUNT: usize = 9;

pub const COLOR_FEATURE_NAMES: [&str; COLOR_FEATURE_COUNT] =
    ["R", "G", "B", "mean_R", "mean_G", "mean_B", "std_R", "std_G", "std_B"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Red = 0,
    Green = 1,
    Blue = 2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelHistogram {
    pub channel: Channel,
    pub bin_count: usize,
    pub bins: Vec<u64>,
}

/// Counts of channel values in equal-width bins over `[0, 256)`.
pub fn channel_histogram(img: &RgbImage, channel: Channel, bin_count: usize) -> Result<ChannelHistogram> {
    if bin_count == 0 || bin_count > 256 || 256 % bin_count != 0 {
        return Err(Error::BadBinCount(bin_count));
    }
    let width = 256 / bin_count;
    let mut bins = vec![0u64; bin_count];
    for px in img.as_raw().chunks_exact(3) {
        bins[px[channel as usize] as usize / width] += 1;
    }
    Ok(ChannelHistogram { channel, bin_count, bins })
}

/// Per pixel: normalized (R, G, B), then windowed mean and population std
/// of each channel, all on the `[0, 1]` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    pub width: usize,
    pub height: usize,
    pub features: Vec<[f64; COLOR_FEATURE_COUNT]>,
}

pub fn color_feature_map(img: &RgbImage, window: usize) -> Result<ColorMap> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::BadWindow(window));
    }
    let (width, height) = img.dims();
    if window > width || window > height {
        return Err(Error::WindowLargerThanImage { window, width, height });
    }
    let r = (window / 2) as isize;
    let n = (window * window) as u64;
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            // Integer moments keep a constant window at exactly zero spread.
            let mut sum = [0u64; 3];
            let mut sum_sq = [0u64; 3];
            for dy in -r..=r {
                let sy = clamp_coord(y as isize + dy, height);
                for dx in -r..=r {
                    let sx = clamp_coord(x as isize + dx, width);
                    let px = img.pixel(sx, sy);
                    for c in 0..3 {
                        let v = u64::from(px[c]);
                        sum[c] += v;
                        sum_sq[c] += v * v;
                    }
                }
            }
            let px = img.pixel(x, y);
            let mut f = [0.0; COLOR_FEATURE_COUNT];
            for c in 0..3 {
                f[c] = f64::from(px[c]) / 255.0;
                f[3 + c] = sum[c] as f64 / (n as f64 * 255.0);
                let spread = n * sum_sq[c] - sum[c] * sum[c];
                f[6 + c] = math::sqrt(spread as f64) / (n as f64 * 255.0);
            }
            out.push(f);
        }
    }
    Ok(ColorMap { width, height, features: out })
}
