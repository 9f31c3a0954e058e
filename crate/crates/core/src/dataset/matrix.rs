use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major design matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    rows: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = names.len();
        let m = rows.len();
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "row {i} has {} values for {n} feature names",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(names, m, values)
    }

    pub fn from_flat(names: Vec<String>, rows: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * names.len() {
            return Err(Error::LengthMismatch {
                what: "matrix values vs rows x names",
                left: values.len(),
                right: rows * names.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("duplicate feature name {a:?}")));
            }
        }
        Ok(Self {
            names,
            rows,
            values,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.names.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.names.len() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.n_features());
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            names: self.names.clone(),
            rows: idx.len(),
            values,
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let names = cols.iter().map(|&c| self.names[c].clone()).collect();
        let mut values = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            values.extend(cols.iter().map(|&c| self.get(i, c)));
        }
        Self {
            names,
            rows: self.rows,
            values,
        }
    }
}

/// Binary trust labels: `true` = trust (1), `false` = distrust (0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<bool>);

impl LabelVector {
    pub fn new(labels: Vec<bool>) -> Self {
        Self(labels)
    }

    pub fn from_u8(labels: &[u8]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| match l {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidValue {
                    column: String::from("label"),
                    value: format!("{other}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| self.0[i]).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect()
    }
}

pub(crate) fn check_aligned(matrix: &FeatureMatrix, labels: &LabelVector) -> Result<()> {
    if matrix.n_rows() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "matrix rows vs labels",
            left: matrix.n_rows(),
            right: labels.len(),
        });
    }
    Ok(())
}
