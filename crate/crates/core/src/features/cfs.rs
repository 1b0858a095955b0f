//! Correlation-based feature selection with best-first search.
//!
//! A subset `S` of `k` features scores
//! `k * mean|r(f, class)| / sqrt(k + k (k - 1) * mean|r(f, f')|)`, where the
//! class correlation is point-biserial (Pearson against 0/1 labels) and the
//! inter-feature mean runs over unordered pairs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::math;
use crate::{Error, Result};

/// Consecutive non-improving expansions before the search stops.
pub const STALE_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Ascending column indices.
    pub indices: Vec<usize>,
    pub merit: f64,
}

impl SelectionResult {
    pub fn names(&self, fm: &FeatureMatrix) -> Vec<String> {
        self.indices.iter().map(|&i| fm.names()[i].clone()).collect()
    }
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ma = a[..n].iter().sum::<f64>() / nf;
    let mb = b[..n].iter().sum::<f64>() / nf;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / math::sqrt(saa * sbb)).clamp(-1.0, 1.0)
}

struct Correlations {
    class: Vec<f64>,
    /// Row-major `d x d` absolute inter-feature correlations.
    pairwise: Vec<f64>,
    d: usize,
}

impl Correlations {
    fn compute(fm: &FeatureMatrix, labels: &[bool]) -> Self {
        let d = fm.cols();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        let columns: Vec<Vec<f64>> = (0..d).map(|c| fm.column(c)).collect();
        let class = columns.iter().map(|c| pearson(c, &y).abs()).collect();
        let mut pairwise = vec![0.0; d * d];
        for i in 0..d {
            pairwise[i * d + i] = 1.0;
            for j in i + 1..d {
                let r = pearson(&columns[i], &columns[j]).abs();
                pairwise[i * d + j] = r;
                pairwise[j * d + i] = r;
            }
        }
        Self { class, pairwise, d }
    }

    fn merit(&self, subset: &[usize]) -> f64 {
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let rcf: f64 = subset.iter().map(|&f| self.class[f]).sum();
        let mut rff = 0.0;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                rff += self.pairwise[i * self.d + j];
            }
        }
        let kf = k as f64;
        rcf / math::sqrt(kf + 2.0 * rff)
    }
}

/// Merit of one subset, computed from scratch.
pub fn subset_merit(fm: &FeatureMatrix, labels: &[bool], subset: &[usize]) -> Result<f64> {
    check_inputs(fm, labels)?;
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.iter().any(|&c| c >= fm.cols()) {
        return Err(Error::InvalidConfig("subset column out of range"));
    }
    Ok(Correlations::compute(fm, labels).merit(&s))
}

fn check_inputs(fm: &FeatureMatrix, labels: &[bool]) -> Result<()> {
    if labels.len() != fm.rows() {
        return Err(Error::UnequalLengths);
    }
    if fm.rows() < 2 {
        return Err(Error::TooFewPoints { points: fm.rows(), required: 2 });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClassLabels);
    }
    Ok(())
}

/// Best-first forward search over feature subsets.
///
/// The open list is ordered by merit, ties going to the lexicographically
/// smaller index list. Each expansion adds one feature to the best open
/// subset; the search stops after [`STALE_LIMIT`] consecutive expansions
/// that fail to beat the best merit seen.
pub fn cfs_select(fm: &FeatureMatrix, labels: &[bool]) -> Result<SelectionResult> {
    check_inputs(fm, labels)?;
    let corr = Correlations::compute(fm, labels);
    let d = fm.cols();

    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut open: Vec<(f64, Vec<usize>)> = vec![(0.0, Vec::new())];
    let mut best: (f64, Vec<usize>) = (0.0, Vec::new());
    let mut stale = 0;

    while let Some(pos) = best_open(&open) {
        let (_, node) = open.swap_remove(pos);
        let mut improved = false;
        for f in 0..d {
            if node.binary_search(&f).is_ok() {
                continue;
            }
            let mut child = node.clone();
            let at = child.partition_point(|&c| c < f);
            child.insert(at, f);
            if !visited.insert(child.clone()) {
                continue;
            }
            let merit = corr.merit(&child);
            if merit > best.0 {
                best = (merit, child.clone());
                improved = true;
            }
            open.push((merit, child));
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= STALE_LIMIT {
                break;
            }
        }
    }

    if best.1.is_empty() {
        // Every feature is uncorrelated with the labels; keep the first one.
        best = (corr.merit(&[0]), vec![0]);
    }
    Ok(SelectionResult { indices: best.1, merit: best.0 })
}

fn best_open(open: &[(f64, Vec<usize>)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (m, s)) in open.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bm, bs) = &open[b];
                if *m > *bm || (*m == *bm && s < bs) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}
