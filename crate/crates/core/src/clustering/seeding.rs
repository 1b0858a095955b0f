use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Centroids;
use crate::features::FeatureMatrix;
use crate::math::sq_dist;

/// Greedy k-means++ seeding. The first centre is drawn uniformly. Each
/// further centre is the best of `2 + floor(ln c)` candidates drawn with
/// probability proportional to squared distance from the nearest chosen
/// centre, where best means the lowest resulting potential (first drawn on
/// ties). When every remaining row coincides with a chosen centre the
/// lowest unused row index is taken.
pub fn kmeans_plus_plus(fm: &FeatureMatrix, c: usize, seed: u64) -> Centroids {
    let n = fm.rows();
    let d = fm.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(c);
    let first = rng.random_range(0..n);
    chosen.push(first);
    let mut nearest: Vec<f64> = (0..n).map(|k| sq_dist(fm.row(k), fm.row(first))).collect();

    let trials = 2 + libm::floor(libm::log(c as f64)) as usize;
    while chosen.len() < c {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut best: Option<(f64, usize)> = None;
            for _ in 0..trials {
                let cand = sample_weighted(&nearest, rng.random::<f64>() * total);
                let potential: f64 = nearest
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| w.min(sq_dist(fm.row(k), fm.row(cand))))
                    .sum();
                if best.is_none_or(|(p, _)| potential < p) {
                    best = Some((potential, cand));
                }
            }
            best.map_or(0, |(_, k)| k)
        } else {
            (0..n).find(|k| !chosen.contains(k)).unwrap_or(0)
        };
        chosen.push(next);
        for (k, w) in nearest.iter_mut().enumerate() {
            *w = w.min(sq_dist(fm.row(k), fm.row(next)));
        }
    }

    let mut v = vec![0.0; c * d];
    for (i, &k) in chosen.iter().enumerate() {
        v[i * d..(i + 1) * d].copy_from_slice(fm.row(k));
    }
    Centroids { c, d, v }
}

/// Index whose cumulative weight first exceeds `target`, skipping zero weights.
fn sample_weighted(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut pick = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        pick = k;
        if acc > target {
            break;
        }
    }
    pick
}
