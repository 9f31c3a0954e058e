use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::matrix::{FeatureMatrix, LabelVector};
use super::schema::CellError;
use super::screen::SurveyDataset;
use crate::error::{Error, Result};

/// Outcome of collapsing the 7-point trust answer to a binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrustClass {
    Distrust,
    Trust,
    /// The neutral midpoint carries no class and the row is dropped.
    Excluded,
}

/// 5, 6, 7 are trust; 1, 2, 3 distrust; 4 is excluded.
pub fn binarize_trust(value: i64) -> Result<TrustClass> {
    match value {
        1..=3 => Ok(TrustClass::Distrust),
        4 => Ok(TrustClass::Excluded),
        5..=7 => Ok(TrustClass::Trust),
        other => Err(Error::TrustOutOfRange(other)),
    }
}

fn cell_error(column: &str, value: &str, e: CellError) -> Error {
    match e {
        CellError::UnknownLevel => Error::UnknownCategory {
            column: String::from(column),
            value: String::from(value),
        },
        _ => Error::InvalidValue {
            column: String::from(column),
            value: String::from(value),
        },
    }
}

/// Numeric design matrix and binary labels from screened records.
///
/// Predictors keep schema order. Rows whose trust answer is neutral are
/// dropped; any cell that does not parse is an error naming the column.
pub fn encode_features(dataset: &SurveyDataset) -> Result<(FeatureMatrix, LabelVector)> {
    let schema = &dataset.schema;
    let response = schema.response_index();
    let features = schema.feature_indices();
    let mut values = Vec::with_capacity(dataset.records.len() * features.len());
    let mut labels = Vec::with_capacity(dataset.records.len());
    for record in &dataset.records {
        let column = &schema.columns[response];
        let raw = &record.values[response];
        let trust = column
            .parse(raw)
            .map_err(|e| cell_error(&column.name, raw, e))?;
        let class = binarize_trust(trust as i64)?;
        if class == TrustClass::Excluded {
            continue;
        }
        for &f in &features {
            let column = &schema.columns[f];
            let raw = &record.values[f];
            let v = column.parse(raw).map_err(|e| match e {
                CellError::UnknownLevel => cell_error(&column.name, raw, e),
                _ => Error::InvalidValue {
                    column: format!("{} (record {})", column.name, record.index),
                    value: String::from(raw.as_str()),
                },
            })?;
            values.push(v);
        }
        labels.push(class == TrustClass::Trust);
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let matrix = FeatureMatrix::from_flat(schema.feature_names(), labels.len(), values)?;
    Ok((matrix, LabelVector::new(labels)))
}
