//! JSON documents and CSV projections of models, evaluation reports,
//! explanations and report artifacts.

use std::fs;
use std::path::Path;

use boostlens_core::dataset::{FeatureMatrix, LabelVector};
use boostlens_core::evalx::{Comparison, CvReport, ModelSpec, Summary, TrainedModel};
use boostlens_core::explain::{
    BaseValue, InteractionMatrix, InteractionNormalization, RowExplanation, ShapVector,
};
use boostlens_core::report::{
    CorrelationRow, DependenceSeries, EffectSums, ExplanationBatch, ForceRecord, Importance,
    SummarySeries,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};
use crate::table::write_rows;

pub const MODEL_FORMAT: &str = "boostlens-model";
pub const MODEL_VERSION: u32 = 1;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

/// Pretty-printed with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// On-disk model: a versioned envelope around the trained model and the
/// specification it was trained from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    #[serde(flatten)]
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(spec: ModelSpec, model: TrainedModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            spec,
            model,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = read_json(path)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::format(
                path,
                format!(
                    "unsupported model format {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                    file.format, file.version
                ),
            ));
        }
        if file.spec.kind() != file.model.kind() {
            return Err(Error::format(path, "model kind does not match its spec"));
        }
        if let TrainedModel::Gbt(e) | TrainedModel::Cart(boostlens_core::baselines::CartModel { ensemble: e }) =
            &file.model
        {
            e.validate().context(|| path.display().to_string())?;
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainedRow {
    pub row: usize,
    pub label: Option<bool>,
    pub values: Vec<f64>,
    pub base: BaseValue,
    pub phi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<Vec<Vec<f64>>>,
}

/// Per-row explanations with everything the report stage needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationsFile {
    pub feature_names: Vec<String>,
    /// Expected margin with no feature known; anchors `base + sum(phi)`.
    pub expected_margin: f64,
    /// Mean margin and mean probability over the explained rows.
    pub base: BaseValue,
    pub normalization: InteractionNormalization,
    pub rows: Vec<ExplainedRow>,
}

impl ExplanationsFile {
    pub fn new(
        matrix: &FeatureMatrix,
        labels: Option<&LabelVector>,
        base: BaseValue,
        expected_margin: f64,
        normalization: InteractionNormalization,
        explanations: &[RowExplanation],
    ) -> Self {
        let rows = explanations
            .iter()
            .enumerate()
            .map(|(i, e)| ExplainedRow {
                row: i,
                label: labels.map(|l| l.get(i)),
                values: matrix.row(i).to_vec(),
                base,
                phi: e.shap.phi.clone(),
                phi2: e
                    .interactions
                    .as_ref()
                    .map(|m| (0..m.n).map(|r| m.row(r).to_vec()).collect()),
            })
            .collect();
        Self {
            feature_names: matrix.names().to_vec(),
            expected_margin,
            base,
            normalization,
            rows,
        }
    }

    pub fn to_batch(&self, path: &Path) -> Result<ExplanationBatch> {
        let ctx = || path.display().to_string();
        let values: Vec<Vec<f64>> = self.rows.iter().map(|r| r.values.clone()).collect();
        let matrix = FeatureMatrix::new(self.feature_names.clone(), values).context(ctx)?;
        let labels = self
            .rows
            .iter()
            .map(|r| r.label)
            .collect::<Option<Vec<bool>>>()
            .map(LabelVector::new);
        let explanations: Vec<RowExplanation> = self
            .rows
            .iter()
            .map(|r| RowExplanation {
                shap: ShapVector {
                    base: self.expected_margin,
                    phi: r.phi.clone(),
                },
                interactions: r.phi2.as_ref().map(|m| InteractionMatrix {
                    n: m.len(),
                    values: m.concat(),
                }),
            })
            .collect();
        ExplanationBatch::new(matrix, &explanations, labels).context(ctx)
    }
}

pub fn write_shap_csv(path: &Path, file: &ExplanationsFile) -> Result<()> {
    let mut header = vec!["row", "expected_margin"];
    header.extend(file.feature_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = file
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.row.to_string(), file.expected_margin.to_string()];
            cells.extend(r.phi.iter().map(f64::to_string));
            cells
        })
        .collect();
    write_rows(path, &header, &rows)
}

const METRIC_HEADER: [&str; 5] = ["accuracy", "roc_auc", "precision", "recall", "f1"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_cells(s: &Summary) -> Vec<String> {
    vec![
        s.accuracy.to_string(),
        opt(s.roc_auc),
        s.precision.to_string(),
        s.recall.to_string(),
        s.f1.to_string(),
    ]
}

/// One line per fold, then `mean` and `std`, metric columns in the order
/// accuracy, ROC AUC, precision, recall, F1.
pub fn write_cv_csv(path: &Path, report: &CvReport) -> Result<()> {
    let mut header = vec!["fold"];
    header.extend(METRIC_HEADER);
    let mut rows: Vec<Vec<String>> = report
        .folds
        .iter()
        .map(|f| {
            let m = &f.metrics;
            vec![
                f.fold.to_string(),
                m.accuracy.to_string(),
                opt(m.roc_auc),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f1.to_string(),
            ]
        })
        .collect();
    for (name, s) in [("mean", &report.mean), ("std", &report.std)] {
        let mut r = vec![name.to_string()];
        r.extend(summary_cells(s));
        rows.push(r);
    }
    write_rows(path, &header, &rows)
}

pub fn write_comparison_csv(path: &Path, cmp: &Comparison) -> Result<()> {
    let mut header = vec!["model"];
    header.extend(METRIC_HEADER);
    header.extend(["accuracy_std", "roc_auc_std", "precision_std", "recall_std", "f1_std"]);
    let rows: Vec<Vec<String>> = cmp
        .reports
        .iter()
        .map(|r| {
            let mut cells = vec![r.model.name().to_string()];
            cells.extend(summary_cells(&r.mean));
            cells.extend(summary_cells(&r.std));
            cells
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub fn write_importance_csv(path: &Path, items: &[Importance]) -> Result<()> {
    let rows: Vec<Vec<String>> = items
        .iter()
        .enumerate()
        .map(|(rank, i)| {
            vec![
                (rank + 1).to_string(),
                i.name.clone(),
                i.mean_abs_shap.to_string(),
            ]
        })
        .collect();
    write_rows(path, &["rank", "feature", "mean_abs_shap"], &rows)
}

pub fn write_summary_csv(path: &Path, series: &[SummarySeries]) -> Result<()> {
    let rows: Vec<Vec<String>> = series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| {
                vec![
                    s.name.clone(),
                    p.row.to_string(),
                    p.value.to_string(),
                    p.phi.to_string(),
                    p.color.to_string(),
                ]
            })
        })
        .collect();
    write_rows(path, &["feature", "row", "value", "phi", "color"], &rows)
}

pub fn write_dependence_csv(path: &Path, series: &[DependenceSeries]) -> Result<()> {
    let rows: Vec<Vec<String>> = series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| {
                vec![
                    s.name.clone(),
                    s.partner_name.clone(),
                    p.row.to_string(),
                    p.value.to_string(),
                    p.phi.to_string(),
                    p.partner_value.to_string(),
                ]
            })
        })
        .collect();
    write_rows(
        path,
        &["feature", "partner", "row", "value", "phi", "partner_value"],
        &rows,
    )
}

pub fn write_effects_csv(path: &Path, sums: &EffectSums) -> Result<()> {
    let rows: Vec<Vec<String>> = sums
        .features
        .iter()
        .map(|f| {
            vec![
                f.name.clone(),
                f.main_effect.to_string(),
                f.abs_shap.to_string(),
                f.strongest_pair_name.clone().unwrap_or_default(),
                f.strongest_pair_sum.to_string(),
            ]
        })
        .collect();
    write_rows(
        path,
        &["feature", "main_effect", "abs_shap_sum", "interaction", "interaction_sum"],
        &rows,
    )
}

pub fn write_correlations_csv(path: &Path, rows: &[CorrelationRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.with_shap.to_string(),
                c.shap_degenerate.to_string(),
                opt(c.with_label),
                c.label_degenerate.to_string(),
            ]
        })
        .collect();
    write_rows(
        path,
        &["feature", "r_shap", "shap_degenerate", "r_label", "label_degenerate"],
        &rows,
    )
}

pub fn write_force_csv(path: &Path, records: &[ForceRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .flat_map(|f| {
            f.contributions.iter().map(move |c| {
                vec![
                    f.row.to_string(),
                    f.base.to_string(),
                    f.margin.to_string(),
                    f.probability.to_string(),
                    f.label.map(|l| u8::from(l).to_string()).unwrap_or_default(),
                    c.name.clone(),
                    c.value.to_string(),
                    c.phi.to_string(),
                ]
            })
        })
        .collect();
    write_rows(
        path,
        &["row", "base", "margin", "probability", "label", "feature", "value", "phi"],
        &rows,
    )
}
