//! Global and local summaries of a batch of explanations: importance
//! ranking, summary and dependence plot data, interaction effect sums,
//! correlation tables, and force-plot records.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::explain::RowExplanation;
use crate::math::{pearson, sigmoid};

/// Explanations for `M` rows over `n` features, with the rows' feature
/// values and optional labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationBatch {
    pub values: FeatureMatrix,
    /// `M x n`, row-major.
    pub phi: Vec<f64>,
    /// `M x n x n`, row-major, when interactions were computed.
    pub phi2: Option<Vec<f64>>,
    /// Expected margin with no feature known.
    pub base: f64,
    pub labels: Option<LabelVector>,
}

impl ExplanationBatch {
    pub fn new(
        values: FeatureMatrix,
        explanations: &[RowExplanation],
        labels: Option<LabelVector>,
    ) -> Result<Self> {
        let (m, n) = (values.n_rows(), values.n_features());
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        if explanations.len() != m {
            return Err(Error::LengthMismatch {
                what: "explanations and rows",
                left: explanations.len(),
                right: m,
            });
        }
        if let Some(l) = &labels {
            if l.len() != m {
                return Err(Error::LengthMismatch {
                    what: "labels and rows",
                    left: l.len(),
                    right: m,
                });
            }
        }
        let base = explanations[0].shap.base;
        let with_pairs = explanations[0].interactions.is_some();
        let mut phi = Vec::with_capacity(m * n);
        let mut phi2 = with_pairs.then(|| Vec::with_capacity(m * n * n));
        for e in explanations {
            if e.shap.phi.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: e.shap.phi.len(),
                });
            }
            phi.extend_from_slice(&e.shap.phi);
            match (&mut phi2, &e.interactions) {
                (Some(acc), Some(mat)) if mat.n == n => acc.extend_from_slice(&mat.values),
                (None, None) => {}
                (Some(_), Some(mat)) => {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: mat.n,
                    })
                }
                _ => return Err(Error::MissingInteractions),
            }
        }
        Ok(Self {
            values,
            phi,
            phi2,
            base,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.n_features()
    }

    pub fn names(&self) -> &[String] {
        self.values.names()
    }

    pub fn phi(&self, row: usize, feature: usize) -> f64 {
        self.phi[row * self.n_features() + feature]
    }

    pub fn phi_row(&self, row: usize) -> &[f64] {
        let n = self.n_features();
        &self.phi[row * n..(row + 1) * n]
    }

    pub fn phi_column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.phi(r, feature)).collect()
    }

    fn pairs(&self) -> Result<&[f64]> {
        self.phi2.as_deref().ok_or(Error::MissingInteractions)
    }

    fn check_feature(&self, i: usize) -> Result<()> {
        if i >= self.n_features() {
            return Err(Error::FeatureOutOfRange {
                index: i,
                n: self.n_features(),
            });
        }
        Ok(())
    }

    /// `sum over rows of |phi2[i][j]|`.
    fn pair_abs_sum(&self, phi2: &[f64], i: usize, j: usize) -> f64 {
        let n = self.n_features();
        (0..self.n_rows()).map(|r| phi2[r * n * n + i * n + j].abs()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: usize,
    pub name: String,
    pub mean_abs_shap: f64,
}

/// Features by descending mean `|phi|`; equal scores keep feature order.
pub fn feature_importance(batch: &ExplanationBatch) -> Vec<Importance> {
    let m = batch.n_rows() as f64;
    let mut out: Vec<Importance> = (0..batch.n_features())
        .map(|i| Importance {
            feature: i,
            name: batch.names()[i].clone(),
            mean_abs_shap: batch.phi_column(i).iter().map(|p| p.abs()).sum::<f64>() / m,
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean_abs_shap
            .total_cmp(&a.mean_abs_shap)
            .then(a.feature.cmp(&b.feature))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub row: usize,
    pub phi: f64,
    pub value: f64,
    /// Min-max normalized feature value; 0.5 for a constant feature.
    pub color: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySeries {
    pub feature: usize,
    pub name: String,
    pub points: Vec<SummaryPoint>,
}

/// One series per feature, in importance order.
pub fn summary_points(batch: &ExplanationBatch) -> Vec<SummarySeries> {
    feature_importance(batch)
        .into_iter()
        .map(|imp| {
            let col = batch.values.column(imp.feature);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let points = col
                .iter()
                .enumerate()
                .map(|(r, &v)| SummaryPoint {
                    row: r,
                    phi: batch.phi(r, imp.feature),
                    value: v,
                    color: if hi > lo { (v - lo) / (hi - lo) } else { 0.5 },
                })
                .collect();
            SummarySeries {
                feature: imp.feature,
                name: imp.name,
                points,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partner {
    pub feature: usize,
    pub partner: usize,
    pub partner_name: String,
    /// `sum over rows of |phi2[feature][partner]|`.
    pub strength: f64,
    /// Set when every candidate's strength is zero.
    pub degenerate: bool,
}

/// The feature with the largest summed absolute interaction with `i`.
pub fn strongest_partner(batch: &ExplanationBatch, i: usize) -> Result<Partner> {
    batch.check_feature(i)?;
    let phi2 = batch.pairs()?;
    if batch.n_features() < 2 {
        return Err(Error::InvalidConfig("a partner needs at least two features".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for j in (0..batch.n_features()).filter(|&j| j != i) {
        let s = batch.pair_abs_sum(phi2, i, j);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((j, s));
        }
    }
    let (j, strength) = best.expect("at least one candidate");
    Ok(Partner {
        feature: i,
        partner: j,
        partner_name: batch.names()[j].clone(),
        strength,
        degenerate: strength == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependencePoint {
    pub row: usize,
    pub value: f64,
    pub phi: f64,
    pub partner_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceSeries {
    pub feature: usize,
    pub name: String,
    pub partner: usize,
    pub partner_name: String,
    pub points: Vec<DependencePoint>,
}

/// Feature value against its attribution, colored by `partner` (by default
/// the strongest interaction partner).
pub fn dependence_series(
    batch: &ExplanationBatch,
    i: usize,
    partner: Option<usize>,
) -> Result<DependenceSeries> {
    batch.check_feature(i)?;
    let j = match partner {
        Some(j) => {
            batch.check_feature(j)?;
            j
        }
        None => strongest_partner(batch, i)?.partner,
    };
    let points = (0..batch.n_rows())
        .map(|r| DependencePoint {
            row: r,
            value: batch.values.get(r, i),
            phi: batch.phi(r, i),
            partner_value: batch.values.get(r, j),
        })
        .collect();
    Ok(DependenceSeries {
        feature: i,
        name: batch.names()[i].clone(),
        partner: j,
        partner_name: batch.names()[j].clone(),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub feature: usize,
    pub name: String,
    /// `sum over rows of |phi2[i][i]|`.
    pub main_effect: f64,
    /// `sum over rows of |phi[i]|`.
    pub abs_shap: f64,
    pub strongest_pair: Option<usize>,
    pub strongest_pair_name: Option<String>,
    pub strongest_pair_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSum {
    pub i: usize,
    pub j: usize,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSums {
    pub features: Vec<EffectRow>,
    /// Every unordered pair `i < j`.
    pub pairs: Vec<PairSum>,
}

pub fn effect_sums(batch: &ExplanationBatch) -> Result<EffectSums> {
    let phi2 = batch.pairs()?;
    let n = batch.n_features();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(PairSum {
                i,
                j,
                sum: batch.pair_abs_sum(phi2, i, j),
            });
        }
    }
    let mut features = Vec::with_capacity(n);
    for i in 0..n {
        let partner = if n >= 2 {
            Some(strongest_partner(batch, i)?)
        } else {
            None
        };
        features.push(EffectRow {
            feature: i,
            name: batch.names()[i].clone(),
            main_effect: batch.pair_abs_sum(phi2, i, i),
            abs_shap: batch.phi_column(i).iter().map(|p| p.abs()).sum(),
            strongest_pair: partner.as_ref().map(|p| p.partner),
            strongest_pair_name: partner.as_ref().map(|p| p.partner_name.clone()),
            strongest_pair_sum: partner.map_or(0.0, |p| p.strength),
        });
    }
    Ok(EffectSums { features, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub feature: usize,
    pub name: String,
    /// Pearson r between the feature and its attributions; 0 if undefined.
    pub with_shap: f64,
    pub shap_degenerate: bool,
    /// Pearson r between the feature and the label, when labels are known.
    pub with_label: Option<f64>,
    pub label_degenerate: bool,
}

fn correlation_or_flag(x: &[f64], y: &[f64]) -> (f64, bool) {
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return (0.0, true);
    }
    match pearson(x, y) {
        Ok(r) => (r, false),
        Err(_) => (0.0, true),
    }
}

pub fn shap_correlations(batch: &ExplanationBatch) -> Vec<CorrelationRow> {
    let label = batch.labels.as_ref().map(|l| l.to_f64());
    (0..batch.n_features())
        .map(|i| {
            let x = batch.values.column(i);
            let (with_shap, shap_degenerate) = correlation_or_flag(&x, &batch.phi_column(i));
            let (with_label, label_degenerate) = match &label {
                Some(y) => {
                    let (r, d) = correlation_or_flag(&x, y);
                    (Some(r), d)
                }
                None => (None, false),
            };
            CorrelationRow {
                feature: i,
                name: batch.names()[i].clone(),
                with_shap,
                shap_degenerate,
                with_label,
                label_degenerate,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub feature: usize,
    pub name: String,
    pub value: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    pub row: usize,
    pub base: f64,
    pub base_probability: f64,
    /// By descending `|phi|`, then feature index.
    pub contributions: Vec<Contribution>,
    pub margin: f64,
    pub probability: f64,
    pub label: Option<bool>,
}

pub fn force_data(batch: &ExplanationBatch, row: usize) -> Result<ForceRecord> {
    if row >= batch.n_rows() {
        return Err(Error::RowOutOfRange {
            index: row,
            rows: batch.n_rows(),
        });
    }
    let phi = batch.phi_row(row);
    let mut contributions: Vec<Contribution> = (0..batch.n_features())
        .map(|i| Contribution {
            feature: i,
            name: batch.names()[i].clone(),
            value: batch.values.get(row, i),
            phi: phi[i],
        })
        .collect();
    contributions.sort_by(|a, b| match b.phi.abs().total_cmp(&a.phi.abs()) {
        Ordering::Equal => a.feature.cmp(&b.feature),
        o => o,
    });
    let margin = batch.base + phi.iter().sum::<f64>();
    Ok(ForceRecord {
        row,
        base: batch.base,
        base_probability: sigmoid(batch.base),
        contributions,
        margin,
        probability: sigmoid(margin),
        label: batch.labels.as_ref().map(|l| l.get(row)),
    })
}
