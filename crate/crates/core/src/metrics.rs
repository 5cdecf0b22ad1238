//! Confusion-matrix metrics, top-k thresholding and group prevalence arithmetic.
//!
//! Rates whose defining denominator is zero are reported as `None` rather than
//! being coerced to zero or left to propagate as NaN.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("confusion counts are all zero")]
    EmptyCounts,
    #[error("k = {k} is out of range 1..={len}")]
    KOutOfRange { k: usize, len: usize },
    #[error("probabilities are not sorted in non-increasing order at position {0}")]
    NotSorted(usize),
    #[error("value {value} at position {index} is not a finite number in [0, 1]")]
    InvalidScore { index: usize, value: f64 },
    #[error("group {0:?} has no members")]
    EmptyGroup(String),
    #[error("group {key:?} has {positives} positives but only {n} members")]
    TooManyPositives { key: String, positives: u64, n: u64 },
    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),
}

/// Integer TP/FP/TN/FN counts for one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// Standard rates for these counts.
    pub fn rates(&self) -> Result<MetricPoint, MetricsError> {
        rates_from_counts(self)
    }
}

/// Metric vector of one group. `None` marks a rate with an empty denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub ppv: Option<f64>,
    pub acc: f64,
    pub prevalence: f64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn rates_from_counts(c: &ConfusionCounts) -> Result<MetricPoint, MetricsError> {
    let total = c.total();
    if total == 0 {
        return Err(MetricsError::EmptyCounts);
    }
    Ok(MetricPoint {
        fpr: ratio(c.fp, c.fp + c.tn),
        fnr: ratio(c.fn_, c.fn_ + c.tp),
        ppv: ratio(c.tp, c.tp + c.fp),
        acc: (c.tp + c.tn) as f64 / total as f64,
        prevalence: c.positives() as f64 / total as f64,
    })
}

/// Size and positive count of one (possibly intersectional) group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupCounts {
    pub key: String,
    pub n: u64,
    pub positives: u64,
}

impl GroupCounts {
    pub fn new(key: impl Into<String>, n: u64, positives: u64) -> Result<Self, MetricsError> {
        let key = key.into();
        if n == 0 {
            return Err(MetricsError::EmptyGroup(key));
        }
        if positives > n {
            return Err(MetricsError::TooManyPositives { key, positives, n });
        }
        Ok(Self { key, n, positives })
    }

    pub fn prevalence(&self) -> f64 {
        self.positives as f64 / self.n as f64
    }

    pub fn negatives(&self) -> u64 {
        self.n - self.positives
    }
}

/// A real-valued classifier score attached to a labelled item.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub score: f64,
    pub label: bool,
    pub index: usize,
}

/// Indices of the `k` highest-scoring items, returned in ascending order.
///
/// Equal scores are ordered by ascending `index`, which makes the threshold
/// `tau(score, f(k))` produce exactly `k` positives on every call.
pub fn topk_select(items: &[ScoredItem], k: usize) -> Result<Vec<usize>, MetricsError> {
    if k == 0 || k > items.len() {
        return Err(MetricsError::KOutOfRange { k, len: items.len() });
    }
    for (i, item) in items.iter().enumerate() {
        if !item.score.is_finite() || !(0.0..=1.0).contains(&item.score) {
            return Err(MetricsError::InvalidScore { index: i, value: item.score });
        }
    }
    let mut order: Vec<&ScoredItem> = items.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    let mut picked: Vec<usize> = order[..k].iter().map(|item| item.index).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Expected precision of the top `k` of a calibrated, descending probability list.
pub fn expected_ppv_at_k(calibrated: &[f64], k: usize) -> Result<f64, MetricsError> {
    if k == 0 || k > calibrated.len() {
        return Err(MetricsError::KOutOfRange { k, len: calibrated.len() });
    }
    for (i, &p) in calibrated.iter().enumerate() {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(MetricsError::InvalidScore { index: i, value: p });
        }
        if i > 0 && p > calibrated[i - 1] {
            return Err(MetricsError::NotSorted(i));
        }
    }
    Ok(calibrated[..k].iter().sum::<f64>() / k as f64)
}

/// Prevalence of the union of two groups. Always lies between the two group
/// prevalences.
pub fn pooled_prevalence(a: &GroupCounts, b: &GroupCounts) -> Result<f64, MetricsError> {
    for g in [a, b] {
        if g.n == 0 {
            return Err(MetricsError::EmptyGroup(g.key.clone()));
        }
    }
    Ok((a.positives + b.positives) as f64 / (a.n + b.n) as f64)
}

/// Largest absolute difference between any two prevalences.
pub fn max_pairwise_diff(prevalences: &[f64]) -> Result<f64, MetricsError> {
    if prevalences.len() < 2 {
        return Err(MetricsError::TooFewGroups(prevalences.len()));
    }
    let (lo, hi) = prevalences
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    Ok(hi - lo)
}

pub fn max_pairwise_prevalence_diff(groups: &[GroupCounts]) -> Result<f64, MetricsError> {
    if let Some(g) = groups.iter().find(|g| g.n == 0) {
        return Err(MetricsError::EmptyGroup(g.key.clone()));
    }
    let prevalences: Vec<f64> = groups.iter().map(GroupCounts::prevalence).collect();
    max_pairwise_diff(&prevalences)
}
