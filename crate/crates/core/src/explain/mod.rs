//! Exact Shapley attributions and pairwise interaction values for boosted
//! tree ensembles, in margin (log-odds) units.
//!
//! The coalition value `v(S)` of a row is the path-dependent expectation of
//! the ensemble: at a split on a feature in `S` the row's branch is
//! followed, otherwise both branches are averaged by training cover.
//!
//! Two routes compute the same numbers:
//!
//! * [`shapley_exact`] / [`interactions_exact`] enumerate all `2^n`
//!   coalitions of an arbitrary game and serve as the reference.
//! * [`TreeExplainer`] exploits the tree structure: a leaf's contribution to
//!   `v(S)` depends only on `S` restricted to the features on that leaf's
//!   path, so each leaf is a tiny game over at most `depth` players. Both the
//!   Shapley value and the interaction index ignore null players, so summing
//!   the per-leaf results gives the exact values for the whole ensemble.

mod coalition;
mod fast;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::gbt::Ensemble;
use crate::math::sigmoid;

pub use coalition::{coalition_value, Coalition, CoalitionValue, TreeGame};
pub use fast::TreeExplainer;

/// Largest `n` accepted by the brute-force routes by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 15;
/// Largest number of distinct features on one root-to-leaf path.
pub const DEFAULT_TREE_FEATURE_CAP: usize = 20;

/// Normalization of the pairwise interaction sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionNormalization {
    /// `|S|! (n - |S| - 2)! / n!`
    #[default]
    Factorial,
    /// `|S|! (n - |S| - 2)! / (2 (n - 1)!)`, the common SHAP convention.
    HalfShapley,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub brute_force_cap: usize,
    pub tree_feature_cap: usize,
    pub normalization: InteractionNormalization,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
            tree_feature_cap: DEFAULT_TREE_FEATURE_CAP,
            normalization: InteractionNormalization::Factorial,
        }
    }
}

/// Per-row attribution: `base + phi.iter().sum()` equals the row's margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapVector {
    /// Expected margin `v(empty set)`.
    pub base: f64,
    pub phi: Vec<f64>,
}

impl ShapVector {
    pub fn total(&self) -> f64 {
        self.base + self.phi.iter().sum::<f64>()
    }
}

/// Symmetric `n x n` matrix of pairwise interaction values. The diagonal
/// holds each feature's main effect: its Shapley value minus its row's
/// off-diagonal interactions, so every row sums to the Shapley value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub n: usize,
    /// Row-major.
    pub values: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Fills the diagonal so each row sums to `phi`.
    pub(crate) fn set_main_effects(&mut self, phi: &[f64]) {
        let n = self.n;
        for i in 0..n {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.values[i * n + j])
                .sum();
            self.values[i * n + i] = phi[i] - off;
        }
    }
}

/// Binomial coefficient as a float (exact for the small sizes used here).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc)
}

/// `s! (n - s - 1)! / n!` for `s = 0..n`.
pub(crate) fn shapley_weights(n: usize) -> Vec<f64> {
    (0..n).map(|s| 1.0 / (n as f64 * binomial(n - 1, s))).collect()
}

/// `s! (n - s - 2)! / (n - 1)!` for `s = 0..n-1`: the interaction index,
/// which is unchanged by adding null players.
pub(crate) fn interaction_index_weights(n: usize) -> Vec<f64> {
    if n < 2 {
        return Vec::new();
    }
    (0..n - 1)
        .map(|s| 1.0 / ((n - 1) as f64 * binomial(n - 2, s)))
        .collect()
}

impl InteractionNormalization {
    /// Factor turning the interaction index over `n` features into this
    /// normalization.
    pub(crate) fn scale(self, n: usize) -> f64 {
        match self {
            InteractionNormalization::Factorial => 1.0 / n as f64,
            InteractionNormalization::HalfShapley => 0.5,
        }
    }
}

fn all_values<G: CoalitionValue + ?Sized>(game: &G, n: usize) -> Result<Vec<f64>> {
    let size = 1usize << n;
    (0..size)
        .map(|mask| Coalition::from_mask(n, mask as u64).map(|s| game.value(&s)))
        .collect()
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= 64 {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// Shapley values of `game` over `n` players by full enumeration:
/// `phi_i = sum_{S not containing i} |S|! (n-|S|-1)! / n! * (v(S + i) - v(S))`.
pub fn shapley_exact<G: CoalitionValue + ?Sized>(game: &G, n: usize, cap: usize) -> Result<ShapVector> {
    check_cap(n, cap)?;
    let v = all_values(game, n)?;
    let w = shapley_weights(n.max(1));
    let mut phi = vec![0.0; n];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..v.len() {
            if mask & bit == 0 {
                acc += w[mask.count_ones() as usize] * (v[mask | bit] - v[mask]);
            }
        }
        *p = acc;
    }
    Ok(ShapVector { base: v[0], phi })
}

/// Pairwise interaction values of `game` by full enumeration of every
/// coalition without `i` and `j`, weighted per `normalization`; the
/// diagonal holds main effects.
pub fn interactions_exact<G: CoalitionValue + ?Sized>(
    game: &G,
    n: usize,
    cap: usize,
    normalization: InteractionNormalization,
) -> Result<InteractionMatrix> {
    check_cap(n, cap)?;
    let v = all_values(game, n)?;
    let shap = shapley_exact(game, n, cap)?;
    let mut m = InteractionMatrix::zeros(n);
    if n >= 2 {
        let w: Vec<f64> = interaction_index_weights(n)
            .into_iter()
            .map(|x| x * normalization.scale(n))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let (bi, bj) = (1usize << i, 1usize << j);
                let mut acc = 0.0;
                for mask in 0..v.len() {
                    if mask & (bi | bj) == 0 {
                        let second = v[mask | bi | bj] - v[mask | bi] - v[mask | bj] + v[mask];
                        acc += w[mask.count_ones() as usize] * second;
                    }
                }
                m.values[i * n + j] = acc;
                m.values[j * n + i] = acc;
            }
        }
    }
    m.set_main_effects(&shap.phi);
    Ok(m)
}

/// Explanation of one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowExplanation {
    pub shap: ShapVector,
    pub interactions: Option<InteractionMatrix>,
}

/// Mean model output over a reference matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseValue {
    pub margin: f64,
    pub probability: f64,
}

/// Mean margin and mean probability of `ensemble` over the rows of `matrix`.
pub fn base_value(ensemble: &Ensemble, matrix: &FeatureMatrix) -> Result<BaseValue> {
    if matrix.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut margin = 0.0;
    let mut probability = 0.0;
    for row in matrix.rows() {
        let m = ensemble.predict_margin(row)?;
        margin += m;
        probability += sigmoid(m);
    }
    let rows = matrix.n_rows() as f64;
    Ok(BaseValue {
        margin: margin / rows,
        probability: probability / rows,
    })
}

/// Shapley values of `row` with the default configuration.
pub fn shap_values(ensemble: &Ensemble, row: &[f64]) -> Result<ShapVector> {
    TreeExplainer::new(ensemble, &ExplainConfig::default())?.shap_values(row)
}

/// Interaction matrix of `row` with the default configuration.
pub fn shap_interactions(ensemble: &Ensemble, row: &[f64]) -> Result<InteractionMatrix> {
    TreeExplainer::new(ensemble, &ExplainConfig::default())?
        .explain(row, true)
        .map(|e| e.interactions.expect("requested"))
}

/// Explains every row of `matrix`; results are in row order whatever the
/// executor's worker count.
pub fn explain_rows<E: Executor>(
    explainer: &TreeExplainer<'_>,
    matrix: &FeatureMatrix,
    interactions: bool,
    exec: &E,
) -> Result<Vec<RowExplanation>> {
    exec.map(matrix.n_rows(), |i| explainer.explain(matrix.row(i), interactions))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_over_coalitions() {
        for n in 1..12 {
            let w = shapley_weights(n);
            let total: f64 = (0..n).map(|s| binomial(n - 1, s) * w[s]).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        for n in 2..12 {
            let w = interaction_index_weights(n);
            let total: f64 = (0..n - 1).map(|s| binomial(n - 2, s) * w[s]).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_contribution_of_one_coalition() {
        // Benefit = 0, BeeninAV = 1, KnowledgeinAVs = 2.
        let game = |s: &Coalition| -> f64 {
            match (s.contains(0), s.contains(1), s.contains(2)) {
                (true, true, true) => 7.0,
                (true, false, true) => 5.0,
                _ => 0.0,
            }
        };
        let with = Coalition::from_members(3, &[0, 1, 2]).unwrap();
        let without = Coalition::from_members(3, &[0, 2]).unwrap();
        assert_eq!(game(&with) - game(&without), 2.0);
    }

    #[test]
    fn exact_routes_reject_large_n() {
        let game = |_: &Coalition| 0.0;
        assert_eq!(
            shapley_exact(&game, 16, DEFAULT_BRUTE_FORCE_CAP),
            Err(Error::CapExceeded { n: 16, cap: 15 })
        );
    }

    #[test]
    fn symmetric_game_splits_evenly() {
        // v(S) = |S|^2 over 3 players: each gets 3.
        let game = |s: &Coalition| (s.len() * s.len()) as f64;
        let shap = shapley_exact(&game, 3, 15).unwrap();
        for p in &shap.phi {
            assert!((p - 3.0).abs() < 1e-12);
        }
        let m = interactions_exact(&game, 3, 15, InteractionNormalization::HalfShapley).unwrap();
        // Second difference of |S|^2 is always 2; half-SHAP weights sum to 1/2.
        assert!((m.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((m.row_sums()[2] - 3.0).abs() < 1e-12);
    }
}
