//! Fused per-pixel feature matrices and their normalization.

mod cfs;

pub use cfs::{cfs_select, pearson, subset_merit, SelectionResult, STALE_LIMIT};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::color::{ColorMap, COLOR_FEATURE_COUNT, COLOR_FEATURE_NAMES};
use crate::math;
use crate::texture::{TextureMap, TEXTURE_FEATURE_COUNT, TEXTURE_FEATURE_NAMES};
use crate::{Error, Result};

pub const FUSED_FEATURE_COUNT: usize = COLOR_FEATURE_COUNT + TEXTURE_FEATURE_COUNT;

/// Names of the fused columns: color first, then texture.
pub fn fused_feature_names() -> impl Iterator<Item = &'static str> {
    COLOR_FEATURE_NAMES.iter().chain(TEXTURE_FEATURE_NAMES.iter()).copied()
}

/// Row-major `rows x cols` matrix with one named column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let cols = names.len();
        if cols == 0 || rows * cols != values.len() {
            return Err(Error::BadDimensions { width: cols, height: rows, len: values.len() });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidConfig("duplicate feature column name"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("feature matrix contains a non-finite value"));
        }
        Ok(Self { rows, cols, values, names })
    }

    /// Unnamed columns `f0, f1, ...`; convenient for synthetic data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::UnequalLengths);
        }
        let names = (0..cols).map(|i| alloc::format!("f{i}")).collect();
        Self::new(rows.len(), names, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if cols.is_empty() || cols.iter().any(|&c| c >= self.cols) {
            return Err(Error::InvalidConfig("column selection out of range"));
        }
        let mut values = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        let names = cols.iter().map(|&c| self.names[c].clone()).collect();
        Self::new(self.rows, names, values)
    }

    pub fn select_named<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx: Result<Vec<usize>> = names
            .iter()
            .map(|n| self.column_index(n.as_ref()).ok_or_else(|| Error::UnknownFeature(n.as_ref().to_string())))
            .collect();
        self.select_columns(&idx?)
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self { rows: rows.len(), cols: self.cols, values, names: self.names.clone() }
    }

    /// Stacks matrices with identical column names.
    pub fn vstack(parts: &[FeatureMatrix]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyList)?;
        if parts.iter().any(|p| p.names != first.names) {
            return Err(Error::UnequalLengths);
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let values = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
        Ok(Self { rows, cols: first.cols, values, names: first.names.clone() })
    }
}

/// Concatenates each pixel's color and texture descriptors (9 + 22 columns).
pub fn fuse(color: &ColorMap, texture: &TextureMap) -> Result<FeatureMatrix> {
    if (color.width, color.height) != (texture.width, texture.height) {
        return Err(Error::DimensionMismatch {
            expected: (color.width, color.height),
            found: (texture.width, texture.height),
        });
    }
    let rows = color.width * color.height;
    let mut values = Vec::with_capacity(rows * FUSED_FEATURE_COUNT);
    for (c, t) in color.features.iter().zip(&texture.features) {
        values.extend_from_slice(c);
        values.extend_from_slice(t);
    }
    let names = fused_feature_names().map(String::from).collect();
    FeatureMatrix::new(rows, names, values)
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn column_stats(fm: &FeatureMatrix) -> ColumnStats {
    let n = fm.rows as f64;
    let mut mean = alloc::vec![0.0; fm.cols];
    for r in 0..fm.rows {
        for (m, v) in mean.iter_mut().zip(fm.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = alloc::vec![0.0; fm.cols];
    for r in 0..fm.rows {
        for ((s, v), m) in var.iter_mut().zip(fm.row(r)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.iter().map(|s| math::sqrt(s / n)).collect();
    ColumnStats { mean, std }
}

fn is_constant(fm: &FeatureMatrix, col: usize) -> bool {
    let first = fm.get(0, col);
    (1..fm.rows).all(|r| fm.get(r, col) == first)
}

/// Standardizes every column to zero mean, unit population std. Constant
/// columns become all zeros.
pub fn zscore(fm: &FeatureMatrix) -> FeatureMatrix {
    if fm.rows == 0 {
        return fm.clone();
    }
    let stats = column_stats(fm);
    let constant: Vec<bool> = (0..fm.cols).map(|c| is_constant(fm, c) || stats.std[c] == 0.0).collect();
    let mut values = fm.values.clone();
    for row in values.chunks_exact_mut(fm.cols) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = if constant[c] { 0.0 } else { (*v - stats.mean[c]) / stats.std[c] };
        }
    }
    FeatureMatrix { rows: fm.rows, cols: fm.cols, values, names: fm.names.clone() }
}
