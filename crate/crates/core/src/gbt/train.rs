use alloc::vec;
use alloc::vec::Vec;

use super::split::{best_split_sorted, sort_rows};
use super::tree::{prune_tree, DecisionTree, Node, NodeKind, Split};
use super::{leaf_weight, logistic_grad_hess, Ensemble, GradHess, TrainConfig};
use crate::dataset::{check_aligned, FeatureMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::math::log_loss;

struct Grower<'a> {
    matrix: &'a FeatureMatrix,
    grad: &'a [f64],
    hess: &'a [f64],
    config: &'a TrainConfig,
    nodes: Vec<Node>,
    goes_left: Vec<bool>,
}

impl Grower<'_> {
    fn leaf(&mut self, stats: GradHess) -> usize {
        // Zero curvature leaves no Newton step to take.
        let weight = leaf_weight(&stats, self.config.lambda).unwrap_or(0.0);
        self.nodes.push(Node::leaf(weight, stats));
        self.nodes.len() - 1
    }

    /// `rows` ascending; `sorted[f]` holds the same rows ordered by feature `f`.
    fn grow(&mut self, rows: Vec<usize>, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let stats = GradHess::from_rows(&rows, self.grad, self.hess);
        if depth >= self.config.max_depth || rows.len() < 2 * self.config.min_child_rows {
            return self.leaf(stats);
        }
        let Some(best) =
            best_split_sorted(&sorted, &stats, self.matrix, self.grad, self.hess, self.config)
        else {
            return self.leaf(stats);
        };

        for &r in &rows {
            self.goes_left[r] = self.matrix.get(r, best.feature) < best.threshold;
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.goes_left[r]);
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&r| self.goes_left[r]);
            left_sorted.push(l);
            right_sorted.push(r);
        }

        let at = self.nodes.len();
        self.nodes.push(Node {
            kind: NodeKind::Leaf { weight: 0.0 },
            cover: stats.rows,
            grad: stats.grad,
            hess: stats.hess,
        });
        let left = self.grow(left_rows, left_sorted, depth + 1);
        let right = self.grow(right_rows, right_sorted, depth + 1);
        self.nodes[at].kind = NodeKind::Split(Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            left,
            right,
        });
        at
    }
}

/// Grows one tree depth-first on fixed gradients and hessians.
///
/// Growth stops at `max_depth`, when no split has positive gain, or when a
/// node cannot produce two children of `min_child_rows` rows.
pub fn grow_tree(
    grad: &[f64],
    hess: &[f64],
    matrix: &FeatureMatrix,
    config: &TrainConfig,
) -> Result<DecisionTree> {
    if grad.len() != matrix.n_rows() || hess.len() != matrix.n_rows() {
        return Err(Error::LengthMismatch {
            what: "gradients vs matrix rows",
            left: grad.len().min(hess.len()),
            right: matrix.n_rows(),
        });
    }
    if matrix.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let rows: Vec<usize> = (0..matrix.n_rows()).collect();
    let sorted = (0..matrix.n_features())
        .map(|f| sort_rows(&rows, matrix, f))
        .collect();
    let mut grower = Grower {
        matrix,
        grad,
        hess,
        config,
        nodes: Vec::new(),
        goes_left: vec![false; matrix.n_rows()],
    };
    grower.grow(rows, sorted, 0);
    Ok(DecisionTree {
        nodes: grower.nodes,
    })
}

/// Per-round training log-loss; `losses[0]` is the loss before any tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub losses: Vec<f64>,
}

fn mean_log_loss(margins: &[f64], labels: &LabelVector) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels.as_slice())
        .map(|(&m, &y)| log_loss(m, y))
        .sum();
    total / margins.len() as f64
}

pub fn train(matrix: &FeatureMatrix, labels: &LabelVector, config: &TrainConfig) -> Result<Ensemble> {
    train_traced(matrix, labels, config).map(|(e, _)| e)
}

/// Boosts `num_rounds` trees from a zero base margin, recording the
/// training log-loss after every round.
pub fn train_traced(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    config: &TrainConfig,
) -> Result<(Ensemble, TrainingTrace)> {
    config.validate()?;
    check_aligned(matrix, labels)?;
    if matrix.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if !labels.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let m = matrix.n_rows();
    let mut ensemble = Ensemble::empty(matrix.names().to_vec(), config.learning_rate);
    let mut margins = vec![ensemble.base_margin; m];
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m];
    let mut losses = Vec::with_capacity(config.num_rounds + 1);
    losses.push(mean_log_loss(&margins, labels));

    for _ in 0..config.num_rounds {
        for i in 0..m {
            let (g, h) = logistic_grad_hess(margins[i], labels.get(i));
            grad[i] = g;
            hess[i] = h;
        }
        let tree = grow_tree(&grad, &hess, matrix, config)?;
        let tree = prune_tree(&tree, config.lambda, config.gamma);
        for (i, margin) in margins.iter_mut().enumerate() {
            *margin += config.learning_rate * tree.predict(matrix.row(i));
        }
        losses.push(mean_log_loss(&margins, labels));
        ensemble.trees.push(tree);
    }
    Ok((ensemble, TrainingTrace { losses }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::NodeKind;
    use alloc::string::String;

    fn one_d(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(
            vec![String::from("x")],
            xs.iter().map(|&x| vec![x]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_gradients_give_zero_leaf() {
        let m = one_d(&[1.0, 2.0, 3.0]);
        let t = grow_tree(&[0.0; 3], &[0.25; 3], &m, &TrainConfig::default()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.nodes[0].kind, NodeKind::Leaf { weight: 0.0 });
    }

    #[test]
    fn depth_zero_is_a_single_newton_leaf() {
        let m = one_d(&[1.0, 2.0, 3.0]);
        let cfg = TrainConfig {
            max_depth: 0,
            ..TrainConfig::default()
        };
        let g = [0.5, -0.5, -0.5];
        let h = [0.25; 3];
        let t = grow_tree(&g, &h, &m, &cfg).unwrap();
        assert_eq!(t.nodes.len(), 1);
        // -(-0.5) / (0.75 + 1)
        assert_eq!(t.nodes[0].kind, NodeKind::Leaf { weight: 0.5 / 1.75 });
        assert_eq!(t.nodes[0].cover, 3);
    }

    #[test]
    fn separable_data_gives_depth_one_tree() {
        let m = one_d(&[1.0, 2.0, 4.0, 5.0]);
        let (g, h): (Vec<f64>, Vec<f64>) = [false, false, true, true]
            .iter()
            .map(|&y| logistic_grad_hess(0.0, y))
            .unzip();
        let t = grow_tree(&g, &h, &m, &TrainConfig::default()).unwrap();
        assert_eq!(t.depth(), 1);
        match t.nodes[0].kind {
            NodeKind::Split(s) => assert_eq!(s.threshold, 3.0),
            _ => panic!("expected a split"),
        }
        assert!(t.validate(1).is_ok());
    }

    #[test]
    fn zero_rounds_is_constant_half() {
        let m = one_d(&[1.0, 2.0]);
        let y = LabelVector::new(vec![false, true]);
        let cfg = TrainConfig {
            num_rounds: 0,
            ..TrainConfig::default()
        };
        let e = train(&m, &y, &cfg).unwrap();
        assert!(e.trees.is_empty());
        assert_eq!(e.predict_proba(&[1.5]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_rejected() {
        let m = one_d(&[1.0, 2.0]);
        let y = LabelVector::new(vec![true, true]);
        assert_eq!(train(&m, &y, &TrainConfig::default()), Err(Error::SingleClass));
    }

    #[test]
    fn every_round_adds_a_tree() {
        // Labels independent of the only feature's order: trees may collapse
        // to leaves but each still occupies a round.
        let m = one_d(&[1.0, 1.0, 1.0, 1.0]);
        let y = LabelVector::new(vec![false, true, true, false]);
        let cfg = TrainConfig {
            num_rounds: 5,
            ..TrainConfig::default()
        };
        let e = train(&m, &y, &cfg).unwrap();
        assert_eq!(e.trees.len(), 5);
        assert!(e.trees.iter().all(|t| t.nodes.len() == 1));
    }
}
