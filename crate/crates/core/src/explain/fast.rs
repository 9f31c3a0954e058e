use alloc::vec;
use alloc::vec::Vec;

use super::{
    interaction_index_weights, shapley_weights, ExplainConfig, InteractionMatrix,
    InteractionNormalization, RowExplanation, ShapVector,
};
use crate::error::{Error, Result};
use crate::gbt::{Ensemble, NodeKind};

#[derive(Debug, Clone)]
struct Step {
    slot: usize,
    feature: usize,
    threshold: f64,
    left: bool,
}

/// One root-to-leaf path seen as a game over the distinct features it tests.
#[derive(Debug, Clone)]
struct LeafPath {
    weight: f64,
    /// Global feature index of each local slot.
    features: Vec<usize>,
    /// Product of cover ratios per slot.
    cover_ratio: Vec<f64>,
    steps: Vec<Step>,
}

impl LeafPath {
    /// `c(T)` for every subset `T` of the slots, indexed by bit mask.
    fn values(&self, row: &[f64]) -> Vec<f64> {
        let mut follows = vec![1.0; self.features.len()];
        for step in &self.steps {
            let goes_left = row[step.feature] < step.threshold;
            if goes_left != step.left {
                follows[step.slot] = 0.0;
            }
        }
        let mut c = vec![self.weight];
        for (a, b) in follows.iter().zip(&self.cover_ratio) {
            let mut next = vec![0.0; c.len() * 2];
            for (m, v) in c.iter().enumerate() {
                next[m] = v * b;
                next[m + c.len()] = v * a;
            }
            c = next;
        }
        c
    }
}

/// Precomputed ensemble paths for fast exact explanations.
#[derive(Debug, Clone)]
pub struct TreeExplainer<'a> {
    ensemble: &'a Ensemble,
    paths: Vec<LeafPath>,
    base: f64,
    normalization: InteractionNormalization,
    shapley_w: Vec<Vec<f64>>,
    index_w: Vec<Vec<f64>>,
}

impl<'a> TreeExplainer<'a> {
    /// Fails with [`Error::TreeFeatureCap`] when a root-to-leaf path tests
    /// more than `config.tree_feature_cap` distinct features.
    pub fn new(ensemble: &'a Ensemble, config: &ExplainConfig) -> Result<Self> {
        ensemble.validate()?;
        let mut paths = Vec::new();
        for (t, tree) in ensemble.trees.iter().enumerate() {
            let mut stack: Vec<(usize, Vec<Step>, Vec<usize>, Vec<f64>)> =
                vec![(0, Vec::new(), Vec::new(), Vec::new())];
            while let Some((idx, steps, features, ratio)) = stack.pop() {
                let node = &tree.nodes[idx];
                match node.kind {
                    NodeKind::Leaf { weight } => {
                        if features.len() > config.tree_feature_cap {
                            return Err(Error::TreeFeatureCap {
                                tree: t,
                                count: features.len(),
                                cap: config.tree_feature_cap,
                            });
                        }
                        paths.push(LeafPath {
                            weight,
                            features,
                            cover_ratio: ratio,
                            steps,
                        });
                    }
                    NodeKind::Split(split) => {
                        for (child, left) in [(split.right, false), (split.left, true)] {
                            let share = tree.nodes[child].cover as f64 / node.cover as f64;
                            let mut features = features.clone();
                            let mut ratio = ratio.clone();
                            let slot = match features.iter().position(|&f| f == split.feature) {
                                Some(s) => s,
                                None => {
                                    features.push(split.feature);
                                    ratio.push(1.0);
                                    features.len() - 1
                                }
                            };
                            ratio[slot] *= share;
                            let mut steps = steps.clone();
                            steps.push(Step {
                                slot,
                                feature: split.feature,
                                threshold: split.threshold,
                                left,
                            });
                            stack.push((child, steps, features, ratio));
                        }
                    }
                }
            }
        }
        let longest = paths.iter().map(|p| p.features.len()).max().unwrap_or(0);
        let expected: f64 = paths
            .iter()
            .map(|p| p.weight * p.cover_ratio.iter().product::<f64>())
            .sum();
        Ok(Self {
            ensemble,
            base: ensemble.base_margin + ensemble.learning_rate * expected,
            normalization: config.normalization,
            shapley_w: (0..=longest).map(|p| if p == 0 { Vec::new() } else { shapley_weights(p) }).collect(),
            index_w: (0..=longest).map(interaction_index_weights).collect(),
            paths,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        self.ensemble
    }

    /// Expected margin with no feature known.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn shap_values(&self, row: &[f64]) -> Result<ShapVector> {
        self.explain(row, false).map(|e| e.shap)
    }

    pub fn shap_interactions(&self, row: &[f64]) -> Result<InteractionMatrix> {
        self.explain(row, true)
            .map(|e| e.interactions.expect("requested"))
    }

    pub fn explain(&self, row: &[f64], interactions: bool) -> Result<RowExplanation> {
        let n = self.ensemble.n_features();
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        let lr = self.ensemble.learning_rate;
        let pair_scale = lr * self.normalization.scale(n);
        let mut phi = vec![0.0; n];
        let mut matrix = interactions.then(|| InteractionMatrix::zeros(n));
        for path in &self.paths {
            let p = path.features.len();
            if p == 0 {
                continue;
            }
            let c = path.values(row);
            let w = &self.shapley_w[p];
            for k in 0..p {
                let bit = 1usize << k;
                let mut acc = 0.0;
                for mask in 0..c.len() {
                    if mask & bit == 0 {
                        acc += w[mask.count_ones() as usize] * (c[mask | bit] - c[mask]);
                    }
                }
                phi[path.features[k]] += lr * acc;
            }
            if let Some(m) = matrix.as_mut() {
                let w = &self.index_w[p];
                for k in 0..p {
                    for l in k + 1..p {
                        let (bk, bl) = (1usize << k, 1usize << l);
                        let mut acc = 0.0;
                        for mask in 0..c.len() {
                            if mask & (bk | bl) == 0 {
                                let second =
                                    c[mask | bk | bl] - c[mask | bk] - c[mask | bl] + c[mask];
                                acc += w[mask.count_ones() as usize] * second;
                            }
                        }
                        let (i, j) = (path.features[k], path.features[l]);
                        m.values[i * n + j] += pair_scale * acc;
                        m.values[j * n + i] += pair_scale * acc;
                    }
                }
            }
        }
        if let Some(m) = matrix.as_mut() {
            m.set_main_effects(&phi);
        }
        Ok(RowExplanation {
            shap: ShapVector {
                base: self.base,
                phi,
            },
            interactions: matrix,
        })
    }
}
