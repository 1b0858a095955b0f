//! The fuzzy c-means family.
//!
//! One alternating solver covers all four variants:
//!
//! * FCM: distance `‖x_k − v_i‖²`, centre = `u^m`-weighted mean.
//! * KFCM: distance `1 − K(x_k, v_i)` with `K(x, v) = exp(−‖x − v‖² / σ²)`;
//!   the centre update weights rows by `u^m K`, evaluated at the previous
//!   centre (a majorize-minimize step, so the objective cannot increase).
//! * SKFCM: adds `(α / N_R) Σ_{r ∈ N_k} (1 − K(x_r, v_i))` to each
//!   pixel's distance, `N_k` being the window around pixel `k` minus the
//!   pixel itself and `N_R = window² − 1`.
//! * DuS-KFCM: SKFCM, then each iteration re-weights memberships by the
//!   neighbourhood: `u'_ik ∝ u_ik^p · (Σ_{r ∈ N_k} u_ir)^q`.
//!
//! The trace records the objective of the memberships produced by the
//! membership step, before any smoothing.

use alloc::vec;
use alloc::vec::Vec;

use super::seeding::kmeans_plus_plus;
use super::{estimate_sigma, require_points, Centroids, ClusterConfig, ClusterResult, MembershipMatrix, TraceKind};
use crate::features::FeatureMatrix;
use crate::image::{clamp_coord, window_offsets};
use crate::math::{self, sq_dist};
use crate::{Error, Result};

/// Window neighbours of every pixel (centre excluded), edge-replicated so
/// each pixel has exactly `window² − 1` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    width: usize,
    height: usize,
    size: usize,
    idx: Vec<u32>,
}

impl Neighborhood {
    pub fn new(width: usize, height: usize, window: usize) -> Result<Self> {
        if window < 3 || window % 2 == 0 {
            return Err(Error::BadWindow(window));
        }
        let offsets: Vec<(isize, isize)> = window_offsets(window).filter(|&o| o != (0, 0)).collect();
        let size = offsets.len();
        let mut idx = Vec::with_capacity(width * height * size);
        for y in 0..height {
            for x in 0..width {
                for &(dx, dy) in &offsets {
                    let sx = clamp_coord(x as isize + dx, width);
                    let sy = clamp_coord(y as isize + dy, height);
                    idx.push((sy * width + sx) as u32);
                }
            }
        }
        Ok(Self { width, height, size, idx })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// `N_R`.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn neighbors(&self, k: usize) -> &[u32] {
        &self.idx[k * self.size..(k + 1) * self.size]
    }
}

#[derive(Clone, Copy)]
struct Spatial<'a> {
    alpha: f64,
    nb: &'a Neighborhood,
}

struct Solver<'a> {
    fm: &'a FeatureMatrix,
    c: usize,
    m: f64,
    sigma: Option<f64>,
    spatial: Option<Spatial<'a>>,
    smoothing: Option<(f64, f64)>,
    epsilon: f64,
    max_iter: usize,
}

/// Per-iteration distance buffers, all `c x n`.
struct Distances {
    /// Kernel values, only for the kernel variants.
    kernel: Option<Vec<f64>>,
    /// Point-to-centre distance (squared Euclidean or kernel-induced) plus
    /// the neighbourhood penalty.
    effective: Vec<f64>,
}

#[inline]
fn pow_m(u: f64, m: f64) -> f64 {
    if m == 2.0 {
        u * u
    } else {
        math::powf(u, m)
    }
}

impl<'a> Solver<'a> {
    fn n(&self) -> usize {
        self.fm.rows()
    }

    fn distances(&self, v: &Centroids) -> Distances {
        let (c, n) = (self.c, self.n());
        let mut raw = vec![0.0; c * n];
        let mut kernel = self.sigma.map(|_| vec![0.0; c * n]);
        for i in 0..c {
            let center = v.center(i);
            for k in 0..n {
                let d2 = sq_dist(self.fm.row(k), center);
                match (self.sigma, kernel.as_mut()) {
                    (Some(sigma), Some(kv)) => {
                        let t = -d2 / (sigma * sigma);
                        kv[i * n + k] = math::exp(t);
                        raw[i * n + k] = -math::expm1(t);
                    }
                    _ => raw[i * n + k] = d2,
                }
            }
        }
        let effective = match self.spatial {
            Some(Spatial { alpha, nb }) => {
                let scale = alpha / nb.size() as f64;
                let mut eff = raw.clone();
                for i in 0..c {
                    let row = &raw[i * n..(i + 1) * n];
                    for k in 0..n {
                        let s: f64 = nb.neighbors(k).iter().map(|&r| row[r as usize]).sum();
                        eff[i * n + k] += scale * s;
                    }
                }
                eff
            }
            None => raw,
        };
        Distances { kernel, effective }
    }

    fn memberships(&self, eff: &[f64]) -> MembershipMatrix {
        let (c, n) = (self.c, self.n());
        let expo = 1.0 / (self.m - 1.0);
        let mut u = vec![0.0; c * n];
        let mut t = vec![0.0; c];
        for k in 0..n {
            let zeros = (0..c).filter(|&i| eff[i * n + k] <= 0.0).count();
            if zeros > 0 {
                let share = 1.0 / zeros as f64;
                for i in 0..c {
                    u[i * n + k] = if eff[i * n + k] <= 0.0 { share } else { 0.0 };
                }
                continue;
            }
            let dmin = (0..c).map(|i| eff[i * n + k]).fold(f64::INFINITY, f64::min);
            let mut total = 0.0;
            for i in 0..c {
                let ratio = dmin / eff[i * n + k];
                t[i] = if expo == 1.0 { ratio } else { math::powf(ratio, expo) };
                total += t[i];
            }
            for i in 0..c {
                u[i * n + k] = t[i] / total;
            }
        }
        MembershipMatrix { c, n, u }
    }

    fn objective(&self, u: &MembershipMatrix, eff: &[f64]) -> f64 {
        u.u.iter().zip(eff).map(|(&uik, &d)| pow_m(uik, self.m) * d).sum()
    }

    fn centroids(&self, u: &MembershipMatrix, dist: &Distances, previous: &Centroids) -> Centroids {
        let (c, n, d) = (self.c, self.n(), self.fm.cols());
        let um: Vec<f64> = u.u.iter().map(|&x| pow_m(x, self.m)).collect();
        let mut v = vec![0.0; c * d];
        let mut spill = vec![0.0; if self.spatial.is_some() { n } else { 0 }];
        for i in 0..c {
            let um_i = &um[i * n..(i + 1) * n];
            // spill[r] = Σ_{k : r ∈ N_k} u_ik^m
            if let Some(Spatial { nb, .. }) = self.spatial {
                spill.iter_mut().for_each(|s| *s = 0.0);
                for (k, &w) in um_i.iter().enumerate() {
                    for &r in nb.neighbors(k) {
                        spill[r as usize] += w;
                    }
                }
            }
            let center = &mut v[i * d..(i + 1) * d];
            let mut total = 0.0;
            for r in 0..n {
                let mut w = um_i[r];
                if let Some(Spatial { alpha, nb }) = self.spatial {
                    w += alpha / nb.size() as f64 * spill[r];
                }
                if let Some(kv) = &dist.kernel {
                    w *= kv[i * n + r];
                }
                if w == 0.0 {
                    continue;
                }
                total += w;
                for (acc, x) in center.iter_mut().zip(self.fm.row(r)) {
                    *acc += w * x;
                }
            }
            if total > 0.0 {
                center.iter_mut().for_each(|x| *x /= total);
            } else {
                center.copy_from_slice(previous.center(i));
            }
        }
        Centroids { c, d, v }
    }

    fn smooth(&self, u: &MembershipMatrix, p: f64, q: f64, nb: &Neighborhood) -> MembershipMatrix {
        let (c, n) = (self.c, self.n());
        let mut out = vec![0.0; c * n];
        let mut t = vec![0.0; c];
        for k in 0..n {
            let mut total = 0.0;
            for i in 0..c {
                let row = &u.u[i * n..(i + 1) * n];
                let h: f64 = nb.neighbors(k).iter().map(|&r| row[r as usize]).sum();
                let own = row[k];
                let a = if p == 1.0 { own } else { math::powf(own, p) };
                let b = if q == 0.0 { 1.0 } else if q == 1.0 { h } else { math::powf(h, q) };
                t[i] = a * b;
                total += t[i];
            }
            for i in 0..c {
                out[i * n + k] = if total > 0.0 { t[i] / total } else { u.u[i * n + k] };
            }
        }
        MembershipMatrix { c, n, u: out }
    }

    fn run(&self, init: Centroids) -> ClusterResult {
        let mut v = init;
        let mut dist = self.distances(&v);
        let mut u = self.memberships(&dist.effective);
        if let (Some((p, q)), Some(sp)) = (self.smoothing, self.spatial) {
            u = self.smooth(&u, p, q, sp.nb);
        }
        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;
        for it in 1..=self.max_iter {
            let v_new = self.centroids(&u, &dist, &v);
            dist = self.distances(&v_new);
            let mut u_new = self.memberships(&dist.effective);
            trace.push(self.objective(&u_new, &dist.effective));
            if let (Some((p, q)), Some(sp)) = (self.smoothing, self.spatial) {
                u_new = self.smooth(&u_new, p, q, sp.nb);
            }
            let delta = u_new.max_abs_diff(&u);
            u = u_new;
            v = v_new;
            iterations = it;
            if delta < self.epsilon {
                converged = true;
                break;
            }
        }
        ClusterResult {
            degenerate: v.has_coincident(),
            memberships: u,
            centroids: v,
            trace,
            trace_kind: TraceKind::Objective,
            iterations,
            converged,
            sigma: self.sigma,
        }
    }
}

fn grid_neighborhood(fm: &FeatureMatrix, cfg: &ClusterConfig, dims: (usize, usize)) -> Result<Neighborhood> {
    let (width, height) = dims;
    if width * height != fm.rows() || width == 0 {
        return Err(Error::NotAnImageGrid { rows: fm.rows(), width, height });
    }
    Neighborhood::new(width, height, cfg.window)
}

fn solve(
    fm: &FeatureMatrix,
    cfg: &ClusterConfig,
    kernel: bool,
    spatial: Option<&Neighborhood>,
    smoothing: bool,
) -> Result<ClusterResult> {
    cfg.validate()?;
    require_points(fm, cfg.c)?;
    let sigma = kernel.then(|| cfg.sigma.unwrap_or_else(|| estimate_sigma(fm, cfg.seed)));
    let solver = Solver {
        fm,
        c: cfg.c,
        m: cfg.m,
        sigma,
        spatial: spatial.map(|nb| Spatial { alpha: cfg.alpha, nb }),
        smoothing: smoothing.then_some((cfg.p, cfg.q)),
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
    };
    Ok(solver.run(kmeans_plus_plus(fm, cfg.c, cfg.seed)))
}

/// Standard fuzzy c-means on Euclidean distances.
pub fn fcm_fit(fm: &FeatureMatrix, cfg: &ClusterConfig) -> Result<ClusterResult> {
    solve(fm, cfg, false, None, false)
}

/// Fuzzy c-means with the Gaussian-kernel-induced distance.
pub fn kfcm_fit(fm: &FeatureMatrix, cfg: &ClusterConfig) -> Result<ClusterResult> {
    solve(fm, cfg, true, None, false)
}

/// Kernel FCM with the neighbourhood penalty; rows must be the pixels of a
/// `dims.0 x dims.1` image in row-major order.
pub fn skfcm_fit(fm: &FeatureMatrix, cfg: &ClusterConfig, dims: (usize, usize)) -> Result<ClusterResult> {
    let nb = grid_neighborhood(fm, cfg, dims)?;
    solve(fm, cfg, true, Some(&nb), false)
}

/// Spatial kernel FCM plus per-iteration neighbourhood membership smoothing.
pub fn duskfcm_fit(fm: &FeatureMatrix, cfg: &ClusterConfig, dims: (usize, usize)) -> Result<ClusterResult> {
    let nb = grid_neighborhood(fm, cfg, dims)?;
    solve(fm, cfg, true, Some(&nb), true)
}

/// Penalized kernel objective `Σ u^m [(1 − K_ik) + (α/N_R) Σ_r (1 − K_ri)]`
/// for arbitrary memberships and centres.
pub fn spatial_objective(
    fm: &FeatureMatrix,
    u: &MembershipMatrix,
    v: &Centroids,
    sigma: f64,
    alpha: f64,
    m: f64,
    nb: &Neighborhood,
) -> f64 {
    let solver = Solver {
        fm,
        c: v.c,
        m,
        sigma: Some(sigma),
        spatial: Some(Spatial { alpha, nb }),
        smoothing: None,
        epsilon: 1.0,
        max_iter: 0,
    };
    let dist = solver.distances(v);
    solver.objective(u, &dist.effective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(points: &[f64]) -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        FeatureMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn fcm_two_separated_pairs() {
        let fm = line(&[0.0, 0.1, 10.0, 10.1]);
        let r = fcm_fit(&fm, &ClusterConfig::default()).unwrap();
        let mut cs = r.centroids.v.clone();
        cs.sort_by(f64::total_cmp);
        assert!((cs[0] - 0.05).abs() < 1e-3 && (cs[1] - 10.05).abs() < 1e-3, "{cs:?}");
        for k in 0..4 {
            let col = r.memberships.column(k);
            assert!(col.iter().any(|&u| u > 0.99));
        }
        assert!(r.converged);
    }

    #[test]
    fn equidistant_point_splits_evenly() {
        let solver = Solver {
            fm: &line(&[0.0, 1.0, 2.0]),
            c: 2,
            m: 2.0,
            sigma: None,
            spatial: None,
            smoothing: None,
            epsilon: 1e-5,
            max_iter: 1,
        };
        let v = Centroids { c: 2, d: 1, v: vec![0.0, 2.0] };
        let dist = solver.distances(&v);
        let u = solver.memberships(&dist.effective);
        assert_eq!(u.column(1), vec![0.5, 0.5]);
        // points sitting on a centre get full membership
        assert_eq!(u.column(0), vec![1.0, 0.0]);
    }

    #[test]
    fn kernel_distance_range() {
        let fm = line(&[0.0, 0.5, 3.0, 100.0]);
        let solver = Solver { fm: &fm, c: 2, m: 2.0, sigma: Some(1.0), spatial: None, smoothing: None, epsilon: 1.0, max_iter: 0 };
        let v = Centroids { c: 2, d: 1, v: vec![0.0, 3.0] };
        let dist = solver.distances(&v);
        assert!(dist.effective.iter().all(|&d| (0.0..=1.0).contains(&d)));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let fm = line(&[0.0, 1.0, 2.0]);
        assert_eq!(
            skfcm_fit(&fm, &ClusterConfig::default(), (2, 2)),
            Err(Error::NotAnImageGrid { rows: 3, width: 2, height: 2 })
        );
    }

    #[test]
    fn too_few_points() {
        let fm = line(&[1.0]);
        assert_eq!(fcm_fit(&fm, &ClusterConfig::default()), Err(Error::TooFewPoints { points: 1, required: 2 }));
    }

    #[test]
    fn neighborhood_replicates_edges() {
        let nb = Neighborhood::new(3, 3, 3).unwrap();
        assert_eq!(nb.size(), 8);
        // top-left corner: clamped neighbours
        assert_eq!(nb.neighbors(0), &[0, 0, 1, 0, 1, 3, 3, 4]);
        assert_eq!(nb.neighbors(4), &[0, 1, 2, 3, 5, 6, 7, 8]);
    }
}
