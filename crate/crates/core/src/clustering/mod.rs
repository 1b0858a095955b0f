//! Fuzzy and hard clusterers over feature-matrix rows.
//!
//! All solvers share k-means++ seeding from [`ClusterConfig::seed`], so a
//! fixed seed gives bit-identical results.

mod fuzzy;
mod gmm;
mod kmeans;
mod labels;
mod seeding;

pub use fuzzy::{duskfcm_fit, fcm_fit, kfcm_fit, skfcm_fit, spatial_objective, Neighborhood};
pub use gmm::gmm_fit;
pub use kmeans::{kmeans_fit, RESTARTS as KMEANS_RESTARTS};
pub use labels::{defuzzify, select_lesion_cluster, LesionChoice};
pub use seeding::kmeans_plus_plus;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::math;
use crate::{Error, Result};

/// Centroids closer than this are reported as coincident.
pub const COINCIDENT_CENTROIDS: f64 = 1e-9;

/// Rows drawn when estimating the kernel bandwidth.
pub const SIGMA_SUBSAMPLE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Number of clusters.
    pub c: usize,
    /// Fuzzifier, strictly above 1.
    pub m: f64,
    pub max_iter: usize,
    /// Stop once the largest membership change falls below this.
    pub epsilon: f64,
    /// Weight of the neighbourhood penalty.
    pub alpha: f64,
    /// Exponent on a pixel's own membership when smoothing.
    pub p: f64,
    /// Exponent on the summed neighbourhood membership when smoothing.
    pub q: f64,
    /// Odd side of the spatial neighbourhood.
    pub window: usize,
    /// Gaussian kernel bandwidth; `None` estimates it from the data.
    pub sigma: Option<f64>,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { c: 2, m: 2.0, max_iter: 200, epsilon: 1e-5, alpha: 1.0, p: 1.0, q: 1.0, window: 3, sigma: None, seed: 0 }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c < 2 {
            return Err(Error::InvalidConfig("cluster count must be at least 2"));
        }
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidConfig("fuzzifier m must be finite and > 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be > 0"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidConfig("alpha must be >= 0"));
        }
        if !(self.p >= 0.0) || !(self.q >= 0.0) {
            return Err(Error::InvalidConfig("membership exponents p, q must be >= 0"));
        }
        if self.window < 3 || self.window % 2 == 0 {
            return Err(Error::BadWindow(self.window));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidConfig("sigma must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// `u[i][k]`: membership of row `k` in cluster `i`, stored row-major `c x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipMatrix {
    pub c: usize,
    pub n: usize,
    pub u: Vec<f64>,
}

impl MembershipMatrix {
    #[inline]
    pub fn get(&self, cluster: usize, point: usize) -> f64 {
        self.u[cluster * self.n + point]
    }

    pub fn column(&self, point: usize) -> Vec<f64> {
        (0..self.c).map(|i| self.get(i, point)).collect()
    }

    pub fn column_sum(&self, point: usize) -> f64 {
        (0..self.c).map(|i| self.get(i, point)).sum()
    }

    /// Largest `|sum_i u[i][k] - 1|` over all points.
    pub fn max_column_error(&self) -> f64 {
        (0..self.n).map(|k| (self.column_sum(k) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest entry-wise difference; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &MembershipMatrix) -> f64 {
        self.u.iter().zip(&other.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Cluster centres, row-major `c x d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    pub c: usize,
    pub d: usize,
    pub v: Vec<f64>,
}

impl Centroids {
    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.v[i * self.d..(i + 1) * self.d]
    }

    /// Some pair of centres lies within [`COINCIDENT_CENTROIDS`].
    pub fn has_coincident(&self) -> bool {
        (0..self.c).any(|i| {
            (i + 1..self.c)
                .any(|j| math::sqrt(math::sq_dist(self.center(i), self.center(j))) <= COINCIDENT_CENTROIDS)
        })
    }
}

/// What [`ClusterResult::trace`] records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    /// Objective to minimize; non-increasing.
    Objective,
    /// Data log-likelihood; non-decreasing.
    LogLikelihood,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub memberships: MembershipMatrix,
    pub centroids: Centroids,
    pub trace: Vec<f64>,
    pub trace_kind: TraceKind,
    pub iterations: usize,
    pub converged: bool,
    /// Two centroids coincide; the result is still well formed.
    pub degenerate: bool,
    /// Kernel bandwidth actually used, for the kernel solvers.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Duskfcm,
    Skfcm,
    Kfcm,
    Fcm,
    Fkm,
    Gmm,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Duskfcm, Method::Skfcm, Method::Kfcm, Method::Fcm, Method::Fkm, Method::Gmm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Duskfcm => "duskfcm",
            Method::Skfcm => "skfcm",
            Method::Kfcm => "kfcm",
            Method::Fcm => "fcm",
            Method::Fkm => "fkm",
            Method::Gmm => "gmm",
        }
    }

    /// Whether the solver reads the pixel grid.
    pub fn is_spatial(self) -> bool {
        matches!(self, Method::Duskfcm | Method::Skfcm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig("unknown clustering method"))
    }
}

/// Runs `method` on `fm`; `dims` is the pixel grid the rows came from.
pub fn fit(method: Method, fm: &FeatureMatrix, cfg: &ClusterConfig, dims: (usize, usize)) -> Result<ClusterResult> {
    match method {
        Method::Duskfcm => duskfcm_fit(fm, cfg, dims),
        Method::Skfcm => skfcm_fit(fm, cfg, dims),
        Method::Kfcm => kfcm_fit(fm, cfg),
        Method::Fcm => fcm_fit(fm, cfg),
        Method::Fkm => kmeans_fit(fm, cfg),
        Method::Gmm => gmm_fit(fm, cfg),
    }
}

/// Median pairwise Euclidean distance over a seeded subsample of at most
/// [`SIGMA_SUBSAMPLE`] rows; 1.0 when every sampled row is identical.
pub fn estimate_sigma(fm: &FeatureMatrix, seed: u64) -> f64 {
    let n = fm.rows();
    let rows: Vec<usize> = if n <= SIGMA_SUBSAMPLE {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5167_6d61);
        let mut picked = index::sample(&mut rng, n, SIGMA_SUBSAMPLE).into_vec();
        picked.sort_unstable();
        picked
    };
    let mut dists = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            dists.push(math::sqrt(math::sq_dist(fm.row(i), fm.row(j))));
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    let mid = dists.len() / 2;
    let (_, &mut upper, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if dists.len() % 2 == 1 {
        upper
    } else {
        let lower = dists[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

pub(crate) fn require_points(fm: &FeatureMatrix, required: usize) -> Result<()> {
    if fm.rows() < required {
        return Err(Error::TooFewPoints { points: fm.rows(), required });
    }
    Ok(())
}
