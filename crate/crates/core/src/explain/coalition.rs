use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gbt::{DecisionTree, Ensemble, NodeKind};

/// Set of "known" features out of `n`, stored as a bit mask (`n < 64`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coalition {
    n: usize,
    mask: u64,
}

impl Coalition {
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n >= 64 {
            return Err(Error::CapExceeded { n, cap: 63 });
        }
        if mask >> n != 0 {
            return Err(Error::FeatureOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                n,
            });
        }
        Ok(Self { n, mask })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_mask(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::from_mask(n, if n == 0 { 0 } else { u64::MAX >> (64 - n) })
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in members {
            if i >= n {
                return Err(Error::FeatureOutOfRange { index: i, n });
            }
            mask |= 1 << i;
        }
        Self::from_mask(n, mask)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.mask & (1 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn with(&self, i: usize) -> Self {
        assert!(i < self.n, "feature {i} outside universe of {}", self.n);
        Self {
            n: self.n,
            mask: self.mask | (1 << i),
        }
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.contains(i)).collect()
    }
}

/// A cooperative game: the value of each coalition.
pub trait CoalitionValue {
    fn value(&self, coalition: &Coalition) -> f64;
}

impl<F: Fn(&Coalition) -> f64> CoalitionValue for F {
    fn value(&self, coalition: &Coalition) -> f64 {
        self(coalition)
    }
}

fn tree_expectation(tree: &DecisionTree, node: usize, row: &[f64], s: &Coalition) -> f64 {
    let n = &tree.nodes[node];
    match n.kind {
        NodeKind::Leaf { weight } => weight,
        NodeKind::Split(split) => {
            if s.contains(split.feature) {
                let next = if row[split.feature] < split.threshold {
                    split.left
                } else {
                    split.right
                };
                tree_expectation(tree, next, row, s)
            } else {
                let cl = tree.nodes[split.left].cover as f64;
                let cr = tree.nodes[split.right].cover as f64;
                (cl * tree_expectation(tree, split.left, row, s)
                    + cr * tree_expectation(tree, split.right, row, s))
                    / (cl + cr)
            }
        }
    }
}

/// Expected margin of `row` when only the features in `coalition` are known.
pub fn coalition_value(ensemble: &Ensemble, row: &[f64], coalition: &Coalition) -> Result<f64> {
    if row.len() != ensemble.n_features() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.n_features(),
            got: row.len(),
        });
    }
    if coalition.universe() != ensemble.n_features() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.n_features(),
            got: coalition.universe(),
        });
    }
    let sum: f64 = ensemble
        .trees
        .iter()
        .map(|t| tree_expectation(t, 0, row, coalition))
        .sum();
    Ok(ensemble.base_margin + ensemble.learning_rate * sum)
}

/// The coalition game of one row under an ensemble.
#[derive(Debug, Clone, Copy)]
pub struct TreeGame<'a> {
    ensemble: &'a Ensemble,
    row: &'a [f64],
}

impl<'a> TreeGame<'a> {
    pub fn new(ensemble: &'a Ensemble, row: &'a [f64]) -> Result<Self> {
        if row.len() != ensemble.n_features() {
            return Err(Error::DimensionMismatch {
                expected: ensemble.n_features(),
                got: row.len(),
            });
        }
        Ok(Self { ensemble, row })
    }

    pub fn n_players(&self) -> usize {
        self.ensemble.n_features()
    }
}

impl CoalitionValue for TreeGame<'_> {
    fn value(&self, coalition: &Coalition) -> f64 {
        coalition_value(self.ensemble, self.row, coalition).expect("dimensions checked at construction")
    }
}
