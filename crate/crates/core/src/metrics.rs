//! Pixel-level segmentation metrics.
//!
//! Sensitivity is `TP / (TP + FN)` and specificity `TN / (TN + FP)`.
//! The per-metric functions return an error where the ratio is undefined;
//! [`full_report`] instead substitutes a conventional value and raises the
//! matching flag, so reports never carry NaN.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::image::BinaryMask;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub r#fn: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.r#fn + self.tn
    }

    /// Counts with prediction and ground truth exchanged.
    pub fn swapped(&self) -> Self {
        Self { tp: self.tp, fp: self.r#fn, r#fn: self.fp, tn: self.tn }
    }
}

/// Multi-class labelings of the same pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPartition {
    pub k: usize,
    pub predicted: Vec<usize>,
    pub truth: Vec<usize>,
}

impl LabeledPartition {
    pub fn new(k: usize, predicted: Vec<usize>, truth: Vec<usize>) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::UnequalLengths);
        }
        if predicted.iter().chain(&truth).any(|&l| l >= k) {
            return Err(Error::InvalidConfig("partition label not below k"));
        }
        Ok(Self { k, predicted, truth })
    }

    /// Two-class partition of a mask pair (label 1 = foreground).
    pub fn from_masks(pred: &BinaryMask, gt: &BinaryMask) -> Result<Self> {
        pred.ensure_same_dims(gt)?;
        let p = pred.as_slice().iter().map(|&b| usize::from(b)).collect();
        let g = gt.as_slice().iter().map(|&b| usize::from(b)).collect();
        Self::new(2, p, g)
    }
}

pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    pred.ensure_same_dims(gt)?;
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.r#fn += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `Σ_i |S_i ∩ G_i| / n`.
pub fn segmentation_accuracy(part: &LabeledPartition) -> f64 {
    let n = part.predicted.len();
    if n == 0 {
        return 0.0;
    }
    let hits = part.predicted.iter().zip(&part.truth).filter(|(p, g)| p == g).count();
    hits as f64 / n as f64
}

fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

pub fn sensitivity(c: &ConfusionCounts) -> Result<f64> {
    if c.tp + c.r#fn == 0 {
        return Err(Error::NoPositives);
    }
    Ok(ratio(c.tp, c.tp + c.r#fn))
}

pub fn precision(c: &ConfusionCounts) -> Result<f64> {
    if c.tp + c.fp == 0 {
        return Err(Error::NoPredictedPositives);
    }
    Ok(ratio(c.tp, c.tp + c.fp))
}

/// Harmonic mean of precision and recall, evaluated as `2TP / (2TP + FP + FN)`.
pub fn f1(c: &ConfusionCounts) -> Result<f64> {
    precision(c)?;
    sensitivity(c)?;
    if c.tp == 0 {
        return Err(Error::UndefinedF1);
    }
    Ok(ratio(2 * c.tp, 2 * c.tp + c.fp + c.r#fn))
}

/// Zero when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.r#fn as f64, c.tn as f64);
    let den = (tp + fn_) * (tp + fp) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    ((tp * tn - fp * fn_) / math::sqrt(den)).clamp(-1.0, 1.0)
}

pub fn dice(c: &ConfusionCounts) -> Result<f64> {
    let den = 2 * c.tp + c.fp + c.r#fn;
    if den == 0 {
        return Err(Error::BothMasksEmpty);
    }
    Ok(ratio(2 * c.tp, den))
}

pub fn jaccard(c: &ConfusionCounts) -> Result<f64> {
    let den = c.tp + c.fp + c.r#fn;
    if den == 0 {
        return Err(Error::BothMasksEmpty);
    }
    Ok(ratio(c.tp, den))
}

pub fn specificity(c: &ConfusionCounts) -> Result<f64> {
    if c.tn + c.fp == 0 {
        return Err(Error::NoNegatives);
    }
    Ok(ratio(c.tn, c.tn + c.fp))
}

/// `|X ∩ Y| / |X ∪ Y|` from the set sizes directly.
pub fn iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    pred.ensure_same_dims(gt)?;
    let mut inter = 0u64;
    let mut union = 0u64;
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        inter += u64::from(p && g);
        union += u64::from(p || g);
    }
    if union == 0 {
        return Err(Error::BothMasksEmpty);
    }
    Ok(ratio(inter, union))
}

/// Which report values fell back to a convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricFlags {
    /// Both masks empty: dice, jaccard, iou and f1 set to 1.
    pub undefined_convention: bool,
    /// Ground truth empty: sensitivity set to 0 (1 when both empty).
    pub no_positives: bool,
    /// Prediction empty: precision set to 0 (1 when both empty).
    pub no_predicted_positives: bool,
    /// Ground truth all foreground: specificity set to 0.
    pub no_negatives: bool,
    /// Precision and recall both zero: f1 set to 0.
    pub undefined_f1: bool,
}

impl MetricFlags {
    pub fn any(&self) -> bool {
        self.undefined_convention || self.no_positives || self.no_predicted_positives || self.no_negatives || self.undefined_f1
    }

    /// Space-separated names of the raised flags.
    pub fn describe(&self) -> alloc::string::String {
        let names = [
            (self.undefined_convention, "undefined_convention"),
            (self.no_positives, "no_positives"),
            (self.no_predicted_positives, "no_predicted_positives"),
            (self.no_negatives, "no_negatives"),
            (self.undefined_f1, "undefined_f1"),
        ];
        let raised: Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        raised.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sa: f64,
    pub sensitivity: f64,
    pub precision: f64,
    pub f1: f64,
    pub mcc: f64,
    pub dice: f64,
    pub jaccard: f64,
    pub specificity: f64,
    pub iou: f64,
    pub flags: MetricFlags,
}

pub const METRIC_NAMES: [&str; 9] =
    ["sa", "sensitivity", "precision", "f1", "mcc", "dice", "jaccard", "specificity", "iou"];

impl MetricsReport {
    pub fn values(&self) -> [f64; 9] {
        [
            self.sa,
            self.sensitivity,
            self.precision,
            self.f1,
            self.mcc,
            self.dice,
            self.jaccard,
            self.specificity,
            self.iou,
        ]
    }

    /// Builds the report from counts alone.
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let mut flags = MetricFlags::default();
        let both_empty = c.tp + c.fp + c.r#fn == 0;
        let n = c.total();
        let sa = if n == 0 { 0.0 } else { ratio(c.tp + c.tn, n) };
        let fallback = if both_empty { 1.0 } else { 0.0 };
        let sensitivity = sensitivity(c).unwrap_or_else(|_| {
            flags.no_positives = true;
            fallback
        });
        let precision = precision(c).unwrap_or_else(|_| {
            flags.no_predicted_positives = true;
            fallback
        });
        let dice = dice(c).unwrap_or_else(|_| {
            flags.undefined_convention = true;
            1.0
        });
        let jaccard = jaccard(c).unwrap_or(1.0);
        let f1 = match f1(c) {
            Ok(v) => v,
            Err(Error::UndefinedF1) => {
                flags.undefined_f1 = true;
                0.0
            }
            // one side undefined: the value that keeps f1 = dice
            Err(_) => dice,
        };
        let specificity = specificity(c).unwrap_or_else(|_| {
            flags.no_negatives = true;
            0.0
        });
        Self { sa, sensitivity, precision, f1, mcc: mcc(c), dice, jaccard, specificity, iou: jaccard, flags }
    }
}

/// All nine metrics from one confusion pass.
pub fn full_report(pred: &BinaryMask, gt: &BinaryMask) -> Result<MetricsReport> {
    Ok(MetricsReport::from_counts(&confusion(pred, gt)?))
}

/// Arithmetic mean of each metric; `None` for an empty list.
pub fn mean_report(reports: &[MetricsReport]) -> Option<[f64; 9]> {
    if reports.is_empty() {
        return None;
    }
    let mut acc = [0.0; 9];
    for r in reports {
        for (a, v) in acc.iter_mut().zip(r.values()) {
            *a += v;
        }
    }
    let n = reports.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Some(acc)
}
