//! Evaluation: detection accuracy, entity precision/recall/F1, bootstrap
//! significance, unknown-entity subsets, and dataset statistics.

mod bootstrap;
mod report;
mod stats;
mod subset;

pub use bootstrap::{bootstrap_significance, DEFAULT_RESAMPLES};
pub use report::{metrics_to_csv, metrics_to_json, round2};
pub use stats::{dataset_stats, SplitStats};
pub use subset::{unknown_entity_subset, UnknownEntitySubset};

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {expected} gold items vs {got} predictions")]
    LengthMismatch { expected: usize, got: usize },
    #[error("predictions and gold are not aligned: {0}")]
    Misaligned(String),
}

/// Binary confusion counts with a designated positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// 0 when tp + fp = 0.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// 0 when tp + fn = 0.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    /// The inverted matrix with the other class as positive.
    pub fn flipped(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> ClassMetrics {
        let p = c.precision();
        let r = c.recall();
        ClassMetrics {
            precision: p,
            recall: r,
            f1: f1(p, r),
        }
    }
}

/// 2pr/(p+r), 0 when p + r = 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Article- and entity-level metrics mirroring the headline result rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub detection_accuracy: f64,
    /// Unweighted macro-average over the two entity classes.
    pub entity_overall: ClassMetrics,
    /// Manipulated class as positive.
    pub entity_manipulated: ClassMetrics,
    /// Micro-average over the two entity classes (equals entity accuracy).
    pub entity_overall_micro: ClassMetrics,
    pub entity_counts: ConfusionCounts,
    pub n_articles: usize,
    pub n_entities: usize,
}

/// Fraction of articles whose predicted label equals gold, aligned by doc id.
pub fn detection_metrics(
    predictions: &[(String, Label)],
    gold: &[(String, Label)],
) -> Result<f64, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            expected: gold.len(),
            got: predictions.len(),
        });
    }
    if gold.is_empty() {
        return Ok(0.0);
    }
    let gold_map: HashMap<&str, Label> = gold.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if gold_map.len() != gold.len() {
        return Err(EvalError::Misaligned("duplicate gold doc id".into()));
    }
    let mut correct = 0usize;
    for (id, pred) in predictions {
        match gold_map.get(id.as_str()) {
            Some(g) => {
                if pred == g {
                    correct += 1;
                }
            }
            None => return Err(EvalError::Misaligned(format!("unknown doc id `{id}`"))),
        }
    }
    Ok(correct as f64 / gold.len() as f64)
}

/// Key for aligning per-entity predictions: (doc id, surface).
pub type EntityKey = (String, String);

/// Entity-identification metrics with manipulated as the positive class,
/// plus macro and micro averages over both classes.
pub fn entity_metrics(
    predictions: &[(EntityKey, bool)],
    gold: &[(EntityKey, bool)],
) -> Result<MetricsReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            expected: gold.len(),
            got: predictions.len(),
        });
    }
    let gold_map: HashMap<&EntityKey, bool> = gold.iter().map(|(k, v)| (k, *v)).collect();
    if gold_map.len() != gold.len() {
        return Err(EvalError::Misaligned("duplicate gold entity key".into()));
    }
    let mut counts = ConfusionCounts::default();
    for (key, pred) in predictions {
        let gold_label = gold_map
            .get(key)
            .ok_or_else(|| EvalError::Misaligned(format!("unknown entity key {key:?}")))?;
        match (pred, gold_label) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, false) => counts.tn += 1,
            (false, true) => counts.fn_ += 1,
        }
    }
    Ok(report_from_counts(counts, 0, 0.0))
}

pub(crate) fn report_from_counts(
    counts: ConfusionCounts,
    n_articles: usize,
    detection_accuracy: f64,
) -> MetricsReport {
    let manipulated = ClassMetrics::from_counts(&counts);
    let negative = ClassMetrics::from_counts(&counts.flipped());
    let entity_overall = ClassMetrics {
        precision: (manipulated.precision + negative.precision) / 2.0,
        recall: (manipulated.recall + negative.recall) / 2.0,
        f1: (manipulated.f1 + negative.f1) / 2.0,
    };
    // Micro: pool TP/FP over both classes; for binary single-label data this
    // collapses to accuracy.
    let micro_tp = counts.tp + counts.tn;
    let total = counts.total();
    let micro = if total == 0 {
        0.0
    } else {
        micro_tp as f64 / total as f64
    };
    MetricsReport {
        detection_accuracy,
        entity_overall,
        entity_manipulated: manipulated,
        entity_overall_micro: ClassMetrics {
            precision: micro,
            recall: micro,
            f1: micro,
        },
        entity_counts: counts,
        n_articles,
        n_entities: total,
    }
}
