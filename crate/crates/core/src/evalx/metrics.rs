use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::LabelVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_scores(scores: &[f64], labels: &LabelVector) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "scores and labels",
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score"));
    }
    Ok(())
}

/// A row is predicted positive when its score is at least `threshold`.
pub fn confusion(scores: &[f64], labels: &LabelVector, threshold: f64) -> Result<ConfusionMatrix> {
    check_scores(scores, labels)?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&s, &y) in scores.iter().zip(labels.as_slice()) {
        match (s >= threshold, y) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Metrics whose denominator was zero; each such metric is reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degenerate {
    pub accuracy: bool,
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Degenerate {
    pub fn any(&self) -> bool {
        self.accuracy || self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the scored rows hold a single class.
    pub roc_auc: Option<f64>,
    pub degenerate: Degenerate,
}

fn ratio(num: usize, den: usize, flag: &mut bool) -> f64 {
    if den == 0 {
        *flag = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricSet {
    let mut d = Degenerate::default();
    let accuracy = ratio(cm.tp + cm.tn, cm.total(), &mut d.accuracy);
    let precision = ratio(cm.tp, cm.tp + cm.fp, &mut d.precision);
    let recall = ratio(cm.tp, cm.tp + cm.fn_, &mut d.recall);
    let f1 = if d.precision || d.recall || precision + recall == 0.0 {
        d.f1 = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricSet {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc: None,
        degenerate: d,
    }
}

/// Area under the ROC curve by the trapezoid rule over distinct score
/// thresholds, so tied scores count one half.
pub fn roc_auc(scores: &[f64], labels: &LabelVector) -> Result<f64> {
    check_scores(scores, labels)?;
    let (pos, neg) = (labels.positives(), labels.negatives());
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    // Twice the area in units of one (positive, negative) cell, kept integral.
    let mut area2: u128 = 0;
    let (mut tp, mut fp) = (0u128, 0u128);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels.get(order[i]) {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += (fp - fp0) * (tp + tp0);
    }
    Ok(area2 as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Confusion metrics at `threshold` plus ROC AUC when both classes occur.
pub fn evaluate(scores: &[f64], labels: &LabelVector, threshold: f64) -> Result<MetricSet> {
    let mut m = metrics(&confusion(scores, labels, threshold)?);
    if labels.has_both_classes() {
        m.roc_auc = Some(roc_auc(scores, labels)?);
    }
    Ok(m)
}
