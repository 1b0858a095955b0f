use alloc::vec;
use alloc::vec::Vec;

use super::seeding::kmeans_plus_plus;
use super::{require_points, Centroids, ClusterConfig, ClusterResult, MembershipMatrix, TraceKind};
use crate::features::FeatureMatrix;
use crate::math::sq_dist;
use crate::Result;

fn assign(fm: &FeatureMatrix, centers: &Centroids) -> (Vec<usize>, f64) {
    let mut labels = Vec::with_capacity(fm.rows());
    let mut wcss = 0.0;
    for k in 0..fm.rows() {
        let x = fm.row(k);
        let mut best = (0, sq_dist(x, centers.center(0)));
        for i in 1..centers.c {
            let d = sq_dist(x, centers.center(i));
            if d < best.1 {
                best = (i, d);
            }
        }
        labels.push(best.0);
        wcss += best.1;
    }
    (labels, wcss)
}

fn means(fm: &FeatureMatrix, labels: &[usize], previous: &Centroids) -> Centroids {
    let (c, d) = (previous.c, previous.d);
    let mut v = vec![0.0; c * d];
    let mut counts = vec![0usize; c];
    for (k, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (acc, x) in v[l * d..(l + 1) * d].iter_mut().zip(fm.row(k)) {
            *acc += x;
        }
    }
    for i in 0..c {
        let center = &mut v[i * d..(i + 1) * d];
        if counts[i] == 0 {
            center.copy_from_slice(previous.center(i));
        } else {
            let n = counts[i] as f64;
            center.iter_mut().for_each(|x| *x /= n);
        }
    }
    Centroids { c, d, v }
}

/// Independent k-means++ starts; the run with the lowest final sum of
/// squares is kept.
pub const RESTARTS: u64 = 20;

struct Lloyd {
    labels: Vec<usize>,
    centers: Centroids,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn wcss_of(fm: &FeatureMatrix, labels: &[usize], centers: &Centroids) -> f64 {
    labels.iter().enumerate().map(|(k, &l)| sq_dist(fm.row(k), centers.center(l))).sum()
}

/// Lloyd iterations; at each Lloyd fixed point a Hartigan transfer sweep
/// is tried and, if it moves anything, Lloyd resumes.
fn lloyd(fm: &FeatureMatrix, cfg: &ClusterConfig, seed: u64) -> Lloyd {
    let mut centers = kmeans_plus_plus(fm, cfg.c, seed);
    let (mut labels, wcss) = assign(fm, &centers);
    let mut trace = vec![wcss];
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iter {
        iterations = it;
        centers = means(fm, &labels, &centers);
        let (next, wcss) = assign(fm, &centers);
        if next != labels {
            labels = next;
            trace.push(wcss);
            continue;
        }
        if hartigan_pass(fm, &mut labels, &mut centers) {
            centers = means(fm, &labels, &centers);
            trace.push(wcss_of(fm, &labels, &centers));
            continue;
        }
        trace.push(wcss);
        converged = true;
        break;
    }
    Lloyd { labels, centers, trace, iterations, converged }
}

/// One sweep of single-point transfers (Hartigan). A point moves when the
/// exact change in total sum of squares is negative; means are updated in
/// place. Returns whether anything moved.
fn hartigan_pass(fm: &FeatureMatrix, labels: &mut [usize], centers: &mut Centroids) -> bool {
    let (c, d) = (centers.c, centers.d);
    let mut counts = vec![0usize; c];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let mut moved = false;
    for k in 0..fm.rows() {
        let x = fm.row(k);
        let from = labels[k];
        let nf = counts[from];
        if nf <= 1 {
            continue;
        }
        let remove = nf as f64 / (nf - 1) as f64 * sq_dist(x, centers.center(from));
        let mut best: Option<(usize, f64)> = None;
        for to in (0..c).filter(|&j| j != from) {
            let nt = counts[to];
            let add = nt as f64 / (nt + 1) as f64 * sq_dist(x, centers.center(to));
            if add < remove && best.is_none_or(|(_, b)| add < b) {
                best = Some((to, add));
            }
        }
        if let Some((to, _)) = best {
            let (nf, nt) = (nf as f64, counts[to] as f64);
            for t in 0..d {
                let cf = &mut centers.v[from * d + t];
                *cf = (*cf * nf - x[t]) / (nf - 1.0);
                let ct = &mut centers.v[to * d + t];
                *ct = (*ct * nt + x[t]) / (nt + 1.0);
            }
            counts[from] -= 1;
            counts[to] += 1;
            labels[k] = to;
            moved = true;
        }
    }
    moved
}

/// Lloyd's algorithm from [`RESTARTS`] k-means++ seedings (the first uses
/// `cfg.seed` itself). Memberships are 0/1 and the trace holds the
/// within-cluster sum of squares after each assignment of the kept run.
pub fn kmeans_fit(fm: &FeatureMatrix, cfg: &ClusterConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    require_points(fm, cfg.c)?;
    let mut best = lloyd(fm, cfg, cfg.seed);
    for r in 1..RESTARTS {
        let run = lloyd(fm, cfg, cfg.seed.wrapping_add(r.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        if run.trace.last() < best.trace.last() {
            best = run;
        }
    }
    let Lloyd { labels, centers, trace, iterations, converged } = best;
    let n = fm.rows();
    let mut u = vec![0.0; cfg.c * n];
    for (k, &l) in labels.iter().enumerate() {
        u[l * n + k] = 1.0;
    }
    Ok(ClusterResult {
        degenerate: centers.has_coincident(),
        memberships: MembershipMatrix { c: cfg.c, n, u },
        centroids: centers,
        trace,
        trace_kind: TraceKind::Objective,
        iterations,
        converged,
        sigma: None,
    })
}
