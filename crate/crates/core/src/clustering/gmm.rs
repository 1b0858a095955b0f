use alloc::vec;
use alloc::vec::Vec;

use super::seeding::kmeans_plus_plus;
use super::{require_points, Centroids, ClusterConfig, ClusterResult, MembershipMatrix, TraceKind};
use crate::features::{column_stats, FeatureMatrix};
use crate::math;
use crate::Result;

/// Lower bound on every per-dimension variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

struct Params {
    weights: Vec<f64>,
    means: Centroids,
    /// Row-major `c x d`.
    variances: Vec<f64>,
}

/// Responsibilities (row-major `c x n`) and the data log-likelihood.
fn e_step(fm: &FeatureMatrix, params: &Params) -> (Vec<f64>, f64) {
    let (n, d, c) = (fm.rows(), fm.cols(), params.weights.len());
    let mut resp = vec![0.0; c * n];
    let mut log_p = vec![0.0; c];
    let norms: Vec<f64> = (0..c)
        .map(|i| {
            let vars = &params.variances[i * d..(i + 1) * d];
            math::ln(params.weights[i]) - 0.5 * vars.iter().map(|&s| LN_2PI + math::ln(s)).sum::<f64>()
        })
        .collect();
    let mut ll = 0.0;
    for k in 0..n {
        let x = fm.row(k);
        for i in 0..c {
            let mu = params.means.center(i);
            let vars = &params.variances[i * d..(i + 1) * d];
            let quad: f64 = x.iter().zip(mu).zip(vars).map(|((xv, m), s)| (xv - m) * (xv - m) / s).sum();
            log_p[i] = norms[i] - 0.5 * quad;
        }
        let top = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = log_p.iter().map(|&l| math::exp(l - top)).sum();
        let lse = top + math::ln(total);
        ll += lse;
        for i in 0..c {
            resp[i * n + k] = math::exp(log_p[i] - lse);
        }
    }
    (resp, ll)
}

fn m_step(fm: &FeatureMatrix, resp: &[f64], previous: &Params) -> Params {
    let (n, d, c) = (fm.rows(), fm.cols(), previous.weights.len());
    let mut weights = vec![0.0; c];
    let mut means = vec![0.0; c * d];
    let mut variances = vec![0.0; c * d];
    for i in 0..c {
        let r = &resp[i * n..(i + 1) * n];
        let nk: f64 = r.iter().sum();
        weights[i] = nk / n as f64;
        if !(nk > f64::MIN_POSITIVE) {
            means[i * d..(i + 1) * d].copy_from_slice(previous.means.center(i));
            variances[i * d..(i + 1) * d].copy_from_slice(&previous.variances[i * d..(i + 1) * d]);
            continue;
        }
        let mu = &mut means[i * d..(i + 1) * d];
        for (k, &w) in r.iter().enumerate() {
            for (acc, x) in mu.iter_mut().zip(fm.row(k)) {
                *acc += w * x;
            }
        }
        mu.iter_mut().for_each(|m| *m /= nk);
        let var = &mut variances[i * d..(i + 1) * d];
        for (k, &w) in r.iter().enumerate() {
            for ((acc, x), m) in var.iter_mut().zip(fm.row(k)).zip(mu.iter()) {
                *acc += w * (x - m) * (x - m);
            }
        }
        var.iter_mut().for_each(|s| *s = (*s / nk).max(VARIANCE_FLOOR));
    }
    Params { weights, means: Centroids { c, d, v: means }, variances }
}

/// Diagonal-covariance Gaussian mixture fitted by EM. Memberships are the
/// responsibilities; the trace is the log-likelihood before each M-step.
pub fn gmm_fit(fm: &FeatureMatrix, cfg: &ClusterConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    let (n, d, c) = (fm.rows(), fm.cols(), cfg.c);
    require_points(fm, c * (d + 1))?;
    let global = column_stats(fm);
    let mut params = Params {
        weights: vec![1.0 / c as f64; c],
        means: kmeans_plus_plus(fm, c, cfg.seed),
        variances: (0..c).flat_map(|_| global.std.iter().map(|s| (s * s).max(VARIANCE_FLOOR))).collect(),
    };
    let (mut resp, ll) = e_step(fm, &params);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        params = m_step(fm, &resp, &params);
        let (next, ll) = e_step(fm, &params);
        trace.push(ll);
        iterations = it;
        let delta = next.iter().zip(&resp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        resp = next;
        if delta < cfg.epsilon {
            converged = true;
            break;
        }
    }
    Ok(ClusterResult {
        degenerate: params.means.has_coincident(),
        memberships: MembershipMatrix { c, n, u: resp },
        centroids: params.means,
        trace,
        trace_kind: TraceKind::LogLikelihood,
        iterations,
        converged,
        sigma: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn needs_enough_points() {
        let fm = FeatureMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(gmm_fit(&fm, &ClusterConfig::default()), Err(Error::TooFewPoints { points: 3, required: 6 }));
    }
}
