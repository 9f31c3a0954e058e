//! Second-order gradient-boosted regression trees with the logistic
//! objective and exact greedy split search.
//!
//! Each round fits one tree to the per-row gradient `g = p - y` and hessian
//! `h = p (1 - p)` of the log-loss at the current margins. Leaves take the
//! regularized Newton weight `-G / (H + lambda)` and a split is only kept
//! when its objective reduction, net of the `gamma` penalty, is positive.

mod split;
mod train;
mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sigmoid;

pub use split::{find_best_split, SplitCandidate};
pub use train::{grow_tree, train, train_traced, TrainingTrace};
pub use tree::{prune_tree, DecisionTree, Node, NodeKind, Split};

/// Hyperparameters of the boosted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub num_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum objective reduction for a split to be kept.
    pub gamma: f64,
    pub min_child_rows: usize,
    /// Carried for provenance; training itself draws no random numbers.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_rounds: 60,
            learning_rate: 0.3,
            max_depth: 4,
            lambda: 1.0,
            gamma: 0.0,
            min_child_rows: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate {} not in (0, 1]", self.learning_rate));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda {} must be finite and >= 0", self.lambda));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma {} must be finite and >= 0", self.gamma));
        }
        if self.min_child_rows == 0 {
            return bad(String::from("min_child_rows must be at least 1"));
        }
        Ok(())
    }
}

/// Running sums of gradients and hessians over a set of rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GradHess {
    pub grad: f64,
    pub hess: f64,
    pub rows: usize,
}

impl GradHess {
    pub fn new(grad: f64, hess: f64, rows: usize) -> Self {
        Self { grad, hess, rows }
    }

    pub fn from_rows(rows: &[usize], grad: &[f64], hess: &[f64]) -> Self {
        let mut acc = Self::default();
        for &r in rows {
            acc.add(grad[r], hess[r]);
        }
        acc
    }

    #[inline]
    pub fn add(&mut self, g: f64, h: f64) {
        self.grad += g;
        self.hess += h;
        self.rows += 1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            grad: self.grad + other.grad,
            hess: self.hess + other.hess,
            rows: self.rows + other.rows,
        }
    }
}

/// Gradient and hessian of the log-loss with respect to the margin.
#[inline]
pub fn logistic_grad_hess(margin: f64, label: bool) -> (f64, f64) {
    let p = sigmoid(margin);
    let y = if label { 1.0 } else { 0.0 };
    (p - y, p * (1.0 - p))
}

/// Optimal leaf output `-G / (H + lambda)`.
pub fn leaf_weight(acc: &GradHess, lambda: f64) -> Result<f64> {
    let denom = acc.hess + lambda;
    if denom == 0.0 {
        return Err(Error::DegenerateLeaf);
    }
    if acc.grad == 0.0 {
        return Ok(0.0);
    }
    Ok(-acc.grad / denom)
}

#[inline]
pub(crate) fn score(grad: f64, hess: f64, lambda: f64) -> f64 {
    let denom = hess + lambda;
    if denom > 0.0 {
        grad * grad / denom
    } else {
        0.0
    }
}

/// Objective reduction of splitting a node into `left` and `right`, minus
/// the split penalty `gamma`.
pub fn split_gain(left: &GradHess, right: &GradHess, lambda: f64, gamma: f64) -> f64 {
    let parent = score(left.grad + right.grad, left.hess + right.hess, lambda);
    0.5 * (score(left.grad, left.hess, lambda) + score(right.grad, right.hess, lambda) - parent)
        - gamma
}

/// Additive tree ensemble: `margin = base_margin + learning_rate * sum(tree outputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub feature_names: Vec<String>,
    pub base_margin: f64,
    pub learning_rate: f64,
    pub trees: Vec<DecisionTree>,
}

impl Ensemble {
    pub fn empty(feature_names: Vec<String>, learning_rate: f64) -> Self {
        Self {
            feature_names,
            base_margin: 0.0,
            learning_rate,
            trees: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(())
    }

    /// Raw (unscaled) output of every tree for `row`.
    pub fn tree_outputs(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_row(row)?;
        Ok(self.trees.iter().map(|t| t.predict(row)).collect())
    }

    pub fn predict_margin(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        Ok(self.base_margin + self.learning_rate * sum)
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        self.predict_margin(row).map(sigmoid)
    }

    /// Structural checks for ensembles that did not come from [`train`]
    /// (hand-built or deserialized).
    pub fn validate(&self) -> Result<()> {
        if !self.base_margin.is_finite() || !self.learning_rate.is_finite() {
            return Err(Error::NonFinite("ensemble header"));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.validate(self.n_features())
                .map_err(|reason| Error::MalformedTree { tree: i, reason })?;
        }
        Ok(())
    }
}
