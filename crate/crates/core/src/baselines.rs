//! Reference classifiers for model comparison: L2-regularized logistic
//! regression and a single classification tree.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_aligned, FeatureMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::gbt::{self, DecisionTree, Ensemble, TrainConfig};
use crate::math::{log_loss, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub l2: f64,
    pub iters: usize,
    pub step: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 0.01,
            iters: 300,
            step: 1.0,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig("l2 must be finite and >= 0".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig("step must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Logistic regression over internally standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2: f64,
    /// Per-feature centering applied before the weights.
    pub means: Vec<f64>,
    /// Per-feature scale (population std, or 1 for constant columns).
    pub scales: Vec<f64>,
}

impl LinearModel {
    pub fn predict_margin(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: row.len(),
            });
        }
        let mut z = self.bias;
        for i in 0..row.len() {
            z += self.weights[i] * (row[i] - self.means[i]) / self.scales[i];
        }
        Ok(z)
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        self.predict_margin(row).map(sigmoid)
    }
}

/// Mean log-loss plus `l2 / 2 * |w|^2` over standardized rows. Parameters
/// are laid out as `[w_0, .., w_{n-1}, bias]`; the bias is not penalized.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    n: usize,
    x: Vec<f64>,
    y: Vec<bool>,
    l2: f64,
}

impl LogisticObjective {
    /// `x` is row-major with `y.len()` rows.
    pub fn new(x: Vec<f64>, y: Vec<bool>, l2: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if x.len() % y.len() != 0 {
            return Err(Error::LengthMismatch {
                what: "design matrix",
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(Self {
            n: x.len() / y.len(),
            x,
            y,
            l2,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n + 1
    }

    fn margin(&self, params: &[f64], r: usize) -> f64 {
        let row = &self.x[r * self.n..(r + 1) * self.n];
        params[self.n] + row.iter().zip(params).map(|(a, w)| a * w).sum::<f64>()
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let m = self.y.len() as f64;
        let data: f64 = (0..self.y.len())
            .map(|r| log_loss(self.margin(params, r), self.y[r]))
            .sum();
        let penalty: f64 = params[..self.n].iter().map(|w| w * w).sum();
        data / m + 0.5 * self.l2 * penalty
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let m = self.y.len() as f64;
        let mut g = vec![0.0; self.n + 1];
        for r in 0..self.y.len() {
            let resid = sigmoid(self.margin(params, r)) - if self.y[r] { 1.0 } else { 0.0 };
            let row = &self.x[r * self.n..(r + 1) * self.n];
            for (gi, a) in g.iter_mut().zip(row) {
                *gi += resid * a;
            }
            g[self.n] += resid;
        }
        for (i, gi) in g.iter_mut().enumerate() {
            *gi /= m;
            if i < self.n {
                *gi += self.l2 * params[i];
            }
        }
        g
    }
}

/// Trained model plus the objective value before the first and after every
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub model: LinearModel,
    pub losses: Vec<f64>,
}

fn standardize(matrix: &FeatureMatrix) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = matrix.n_features();
    let mut means = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for c in 0..n {
        let col = matrix.column(c);
        let sd = crate::math::std_dev(&col);
        means.push(crate::math::mean(&col));
        scales.push(if sd > 0.0 { sd } else { 1.0 });
    }
    let mut x = Vec::with_capacity(matrix.n_rows() * n);
    for row in matrix.rows() {
        for c in 0..n {
            x.push((row[c] - means[c]) / scales[c]);
        }
    }
    (x, means, scales)
}

/// Full-batch gradient descent. A step that would raise the objective is
/// halved until it does not; if no tried step helps, training stops early.
pub fn train_logistic_traced(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    config: &LogisticConfig,
) -> Result<LogisticFit> {
    config.validate()?;
    check_aligned(matrix, labels)?;
    if !labels.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let (x, means, scales) = standardize(matrix);
    let objective = LogisticObjective::new(x, labels.as_slice().to_vec(), config.l2)?;
    let mut params = vec![0.0; objective.n_params()];
    let mut loss = objective.loss(&params);
    let mut losses = vec![loss];
    let mut step = config.step;
    'outer: for _ in 0..config.iters {
        let g = objective.gradient(&params);
        loop {
            let candidate: Vec<f64> = params.iter().zip(&g).map(|(p, gi)| p - step * gi).collect();
            let next = objective.loss(&candidate);
            if next <= loss {
                params = candidate;
                loss = next;
                losses.push(loss);
                break;
            }
            step *= 0.5;
            if step < config.step * 1e-12 {
                break 'outer;
            }
        }
    }
    let n = matrix.n_features();
    Ok(LogisticFit {
        model: LinearModel {
            feature_names: matrix.names().to_vec(),
            weights: params[..n].to_vec(),
            bias: params[n],
            l2: config.l2,
            means,
            scales,
        },
        losses,
    })
}

pub fn train_logistic(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    config: &LogisticConfig,
) -> Result<LinearModel> {
    train_logistic_traced(matrix, labels, config).map(|f| f.model)
}

/// A single tree: one boosting round at learning rate 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CartModel {
    pub ensemble: Ensemble,
}

impl CartModel {
    pub fn tree(&self) -> &DecisionTree {
        &self.ensemble.trees[0]
    }

    pub fn predict_margin(&self, row: &[f64]) -> Result<f64> {
        self.ensemble.predict_margin(row)
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        self.ensemble.predict_proba(row)
    }
}

/// Grows one tree on the round-0 gradients; `num_rounds` and
/// `learning_rate` in `config` are ignored.
pub fn train_cart(matrix: &FeatureMatrix, labels: &LabelVector, config: &TrainConfig) -> Result<CartModel> {
    let config = TrainConfig {
        num_rounds: 1,
        learning_rate: 1.0,
        ..config.clone()
    };
    gbt::train(matrix, labels, &config).map(|ensemble| CartModel { ensemble })
}
