use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{leaf_weight, split_gain, GradHess};

/// Internal node: rows with `value < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Split(Split),
    Leaf { weight: f64 },
}

/// A tree node with the training statistics it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    #[serde(flatten)]
    pub kind: NodeKind,
    /// Training rows that reached this node.
    pub cover: usize,
    pub grad: f64,
    pub hess: f64,
}

impl Node {
    pub fn leaf(weight: f64, stats: GradHess) -> Self {
        Self {
            kind: NodeKind::Leaf { weight },
            cover: stats.rows,
            grad: stats.grad,
            hess: stats.hess,
        }
    }

    pub fn stats(&self) -> GradHess {
        GradHess::new(self.grad, self.hess, self.cover)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// Regression tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn single_leaf(weight: f64, stats: GradHess) -> Self {
        Self {
            nodes: vec![Node::leaf(weight, stats)],
        }
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i].kind {
                NodeKind::Leaf { .. } => return i,
                NodeKind::Split(s) => {
                    i = if row[s.feature] < s.threshold {
                        s.left
                    } else {
                        s.right
                    };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)].kind {
            NodeKind::Leaf { weight } => weight,
            NodeKind::Split(_) => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Split(s) => 1 + go(t, s.left).max(go(t, s.right)),
            }
        }
        go(self, 0)
    }

    /// Features used by at least one split, ascending.
    pub fn distinct_features(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Split(s) => Some(s.feature),
                NodeKind::Leaf { .. } => None,
            })
            .collect();
        set.into_iter().collect()
    }

    pub(crate) fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err(String::from("tree has no nodes"));
        }
        let mut parent_count = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Leaf { weight } => {
                    if !weight.is_finite() {
                        return Err(format!("node {i}: non-finite leaf weight"));
                    }
                }
                NodeKind::Split(s) => {
                    if s.feature >= n_features {
                        return Err(format!(
                            "node {i}: feature {} out of range for {n_features} features",
                            s.feature
                        ));
                    }
                    if !s.threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                    for c in [s.left, s.right] {
                        if c >= self.nodes.len() || c == 0 || c == i {
                            return Err(format!("node {i}: invalid child index {c}"));
                        }
                        parent_count[c] += 1;
                    }
                    if s.left == s.right {
                        return Err(format!("node {i}: both children are node {}", s.left));
                    }
                    let covers = self.nodes[s.left].cover + self.nodes[s.right].cover;
                    if covers != node.cover {
                        return Err(format!(
                            "node {i}: child covers {covers} do not sum to {}",
                            node.cover
                        ));
                    }
                }
            }
            if node.cover == 0 {
                return Err(format!("node {i}: zero cover"));
            }
        }
        if parent_count[0] != 0 {
            return Err(String::from("root has a parent"));
        }
        if let Some(i) = parent_count.iter().skip(1).position(|&c| c != 1) {
            return Err(format!("node {} does not have exactly one parent", i + 1));
        }
        // One parent per non-root node plus a reachable walk of every node
        // rules out cycles and detached components.
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(format!("node {i} reached twice"));
            }
            seen[i] = true;
            if let NodeKind::Split(s) = self.nodes[i].kind {
                stack.push(s.left);
                stack.push(s.right);
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("node {i} unreachable from root"));
        }
        Ok(())
    }
}

/// Collapses every internal node whose recomputed gain is not positive.
///
/// Children are pruned first and each gain is recomputed from the pruned
/// children's accumulators, so applying it twice changes nothing.
pub fn prune_tree(tree: &DecisionTree, lambda: f64, gamma: f64) -> DecisionTree {
    let mut out = Vec::with_capacity(tree.nodes.len());
    prune_into(tree, 0, lambda, gamma, &mut out);
    DecisionTree { nodes: out }
}

fn prune_into(tree: &DecisionTree, i: usize, lambda: f64, gamma: f64, out: &mut Vec<Node>) -> usize {
    let node = tree.nodes[i];
    let at = out.len();
    out.push(node);
    if let NodeKind::Split(s) = node.kind {
        let l = prune_into(tree, s.left, lambda, gamma, out);
        let r = prune_into(tree, s.right, lambda, gamma, out);
        let left = out[l].stats();
        let right = out[r].stats();
        let gain = split_gain(&left, &right, lambda, gamma);
        if gain <= 0.0 {
            let merged = left.merge(&right);
            let weight = leaf_weight(&merged, lambda).unwrap_or(0.0);
            out.truncate(at);
            out.push(Node::leaf(weight, merged));
        } else {
            out[at].kind = NodeKind::Split(Split {
                gain,
                left: l,
                right: r,
                ..s
            });
        }
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(w: f64, g: f64, h: f64, c: usize) -> Node {
        Node::leaf(w, GradHess::new(g, h, c))
    }

    fn split(f: usize, t: f64, l: usize, r: usize, g: f64, h: f64, c: usize) -> Node {
        Node {
            kind: NodeKind::Split(Split {
                feature: f,
                threshold: t,
                gain: 0.0,
                left: l,
                right: r,
            }),
            cover: c,
            grad: g,
            hess: h,
        }
    }

    // root(f0) -> A(f1) [leaves a1, a2], B leaf
    // A's children carry identical statistics, so splitting A reduces
    // nothing and its gain is negative. The root separates G = -2 from G = +2.
    fn three_level() -> DecisionTree {
        DecisionTree {
            nodes: vec![
                split(0, 0.5, 1, 4, 0.0, 2.0, 8),
                split(1, 0.5, 2, 3, -2.0, 1.0, 4),
                leaf(0.5, -1.0, 0.5, 2),
                leaf(0.5, -1.0, 0.5, 2),
                leaf(-1.0, 2.0, 1.0, 4),
            ],
        }
    }

    #[test]
    fn prune_collapses_only_nonpositive_subtree() {
        let t = three_level();
        assert!(t.validate(2).is_ok());
        let p = prune_tree(&t, 1.0, 0.0);
        // Hand oracle: A: 0.5 * (1/1.5 + 1/1.5 - 4/2) = -1/3 -> collapse, weight 2/2 = 1.
        // root: 0.5 * (4/2 + 4/2 - 0/3) = 2 > 0 -> keep.
        assert_eq!(p.nodes.len(), 3);
        match p.nodes[0].kind {
            NodeKind::Split(s) => {
                assert_eq!(s.gain, 2.0);
                assert_eq!(s.feature, 0);
            }
            _ => panic!("root must survive"),
        }
        assert_eq!(p.nodes[1].kind, NodeKind::Leaf { weight: 1.0 });
        assert_eq!(p.nodes[1].cover, 4);
        assert_eq!(p.nodes[2].kind, NodeKind::Leaf { weight: -1.0 });
        assert!(p.validate(2).is_ok());
        assert_eq!(prune_tree(&p, 1.0, 0.0), p);
    }

    #[test]
    fn prune_keeps_positive_gain_tree() {
        let t = DecisionTree {
            nodes: vec![
                split(0, 0.5, 1, 2, 0.0, 2.0, 4),
                leaf(1.0, -1.0, 1.0, 2),
                leaf(-1.0, 1.0, 1.0, 2),
            ],
        };
        let p = prune_tree(&t, 1.0, 0.0);
        assert_eq!(p.nodes.len(), 3);
        assert!(matches!(p.nodes[0].kind, NodeKind::Split(s) if s.gain == 0.5));
        // Large gamma removes it.
        let p = prune_tree(&t, 1.0, 0.5);
        assert_eq!(p.nodes.len(), 1);
    }

    #[test]
    fn prune_collapses_zero_gain_boundary() {
        // lambda = 0: 0.5 * (1/1 + 1/1 - 4/2) = 0 exactly.
        let t = DecisionTree {
            nodes: vec![
                split(0, 0.5, 1, 2, -2.0, 2.0, 4),
                leaf(1.0, -1.0, 1.0, 2),
                leaf(1.0, -1.0, 1.0, 2),
            ],
        };
        assert_eq!(split_gain(&t.nodes[1].stats(), &t.nodes[2].stats(), 0.0, 0.0), 0.0);
        let p = prune_tree(&t, 0.0, 0.0);
        assert_eq!(p.nodes, vec![leaf(1.0, -2.0, 2.0, 4)]);
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        let mut t = three_level();
        t.nodes[1] = split(1, 0.5, 2, 2, -2.0, 1.0, 4);
        assert!(t.validate(2).is_err());
        let mut t = three_level();
        t.nodes[4].cover = 5;
        assert!(t.validate(2).is_err());
        let t = three_level();
        assert!(t.validate(1).is_err());
    }

    #[test]
    fn routing_uses_strict_less_than() {
        let t = DecisionTree {
            nodes: vec![
                split(0, 3.0, 1, 2, 0.0, 2.0, 2),
                leaf(-1.0, 0.0, 1.0, 1),
                leaf(1.0, 0.0, 1.0, 1),
            ],
        };
        assert_eq!(t.predict(&[2.999]), -1.0);
        assert_eq!(t.predict(&[3.0]), 1.0);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.distinct_features(), vec![0]);
    }
}
