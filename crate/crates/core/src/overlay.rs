//! Contour overlays: prediction in magenta, ground truth in green, their
//! overlap blended halfway to white.

use crate::image::{BinaryMask, RgbImage};
use crate::{Error, Result};

pub const PREDICTION_COLOR: [u8; 3] = [255, 0, 255];
pub const GROUND_TRUTH_COLOR: [u8; 3] = [0, 255, 0];

fn blend_white(px: [u8; 3]) -> [u8; 3] {
    px.map(|v| ((u16::from(v) + 255 + 1) / 2) as u8)
}

/// Draws 4-connected mask contours on a copy of `image`. The ground-truth
/// contour is drawn last and wins on shared pixels.
pub fn render_overlay(image: &RgbImage, pred: &BinaryMask, gt: Option<&BinaryMask>) -> Result<RgbImage> {
    for m in core::iter::once(pred).chain(gt) {
        if m.dims() != image.dims() {
            return Err(Error::DimensionMismatch { expected: image.dims(), found: m.dims() });
        }
    }
    let (w, h) = image.dims();
    let mut out = image.clone();
    if let Some(gt) = gt {
        for y in 0..h {
            for x in 0..w {
                if pred.get(x, y) && gt.get(x, y) {
                    out.set_pixel(x, y, blend_white(image.pixel(x, y)));
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            if pred.is_contour(x, y) {
                out.set_pixel(x, y, PREDICTION_COLOR);
            }
        }
    }
    if let Some(gt) = gt {
        for y in 0..h {
            for x in 0..w {
                if gt.is_contour(x, y) {
                    out.set_pixel(x, y, GROUND_TRUTH_COLOR);
                }
            }
        }
    }
    Ok(out)
}
