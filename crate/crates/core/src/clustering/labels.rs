use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ClusterResult;
use crate::image::{LabelImage, RgbImage};
use crate::{Error, Result};

/// Per-pixel argmax of the memberships; ties go to the lower cluster index.
pub fn defuzzify(result: &ClusterResult, dims: (usize, usize)) -> Result<LabelImage> {
    let u = &result.memberships;
    let (width, height) = dims;
    if width * height != u.n {
        return Err(Error::NotAnImageGrid { rows: u.n, width, height });
    }
    let labels = (0..u.n)
        .map(|k| {
            let mut best = 0;
            for i in 1..u.c {
                if u.get(i, k) > u.get(best, k) {
                    best = i;
                }
            }
            best
        })
        .collect();
    Ok(LabelImage { width, height, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionChoice {
    pub cluster: usize,
    /// Mean redness per cluster; `None` for clusters without pixels.
    pub scores: Vec<Option<f64>>,
    /// The best score was shared by another cluster.
    pub ambiguous: bool,
}

/// Picks the cluster with the highest mean redness `R − (G + B) / 2`.
pub fn select_lesion_cluster(result: &ClusterResult, image: &RgbImage, labels: &LabelImage) -> Result<LesionChoice> {
    if image.dims() != labels.dims() {
        return Err(Error::DimensionMismatch { expected: image.dims(), found: labels.dims() });
    }
    let c = result.memberships.c;
    let mut sums = vec![0i64; c];
    let mut counts = vec![0u64; c];
    for (k, &l) in labels.labels.iter().enumerate() {
        if l >= c {
            continue;
        }
        let [r, g, b] = image.pixel_at(k);
        // doubled to stay in integers: 2R - G - B
        sums[l] += 2 * i64::from(r) - i64::from(g) - i64::from(b);
        counts[l] += 1;
    }
    let scores: Vec<Option<f64>> =
        sums.iter().zip(&counts).map(|(&s, &n)| (n > 0).then(|| s as f64 / (2.0 * n as f64))).collect();
    let mut best: Option<(usize, f64)> = None;
    let mut ambiguous = false;
    for (i, s) in scores.iter().enumerate() {
        let Some(s) = *s else { continue };
        match best {
            None => best = Some((i, s)),
            Some((_, b)) if s > b => {
                best = Some((i, s));
                ambiguous = false;
            }
            Some((_, b)) if s == b => ambiguous = true,
            _ => {}
        }
    }
    let (cluster, _) = best.ok_or(Error::EmptyClusters)?;
    Ok(LesionChoice { cluster, scores, ambiguous })
}
