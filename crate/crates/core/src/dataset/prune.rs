use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};
use crate::math::pearson;

/// Pairs with `|r|` above this are pruned by default.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Constant,
    Correlated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub dropped: String,
    /// Surviving partner of a correlated pair.
    pub kept: Option<String>,
    pub r: Option<f64>,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneOutcome {
    pub matrix: FeatureMatrix,
    pub dropped: Vec<DroppedColumn>,
}

/// Removes constant columns, then greedily drops one member of every pair
/// whose absolute Pearson correlation exceeds `threshold`.
///
/// Pairs are handled strongest first (ties by column order). Within a pair
/// the column with the larger mean `|r|` against the other remaining columns
/// is dropped; on a tie the later column goes.
pub fn prune_correlated(matrix: &FeatureMatrix, threshold: f64) -> Result<PruneOutcome> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "correlation threshold {threshold} not in (0, 1]"
        )));
    }
    let names = matrix.names();
    let columns: Vec<Vec<f64>> = (0..matrix.n_features()).map(|j| matrix.column(j)).collect();
    let mut dropped = Vec::new();
    let mut active = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let constant = col.windows(2).all(|w| w[0] == w[1]);
        if constant {
            dropped.push(DroppedColumn {
                dropped: names[j].clone(),
                kept: None,
                r: None,
                reason: DropReason::Constant,
            });
        } else {
            active.push(j);
        }
    }

    let n = matrix.n_features();
    let mut corr = alloc::vec![0.0; n * n];
    for (a, &i) in active.iter().enumerate() {
        corr[i * n + i] = 1.0;
        for &j in &active[a + 1..] {
            let r = pearson(&columns[i], &columns[j])?;
            corr[i * n + j] = r;
            corr[j * n + i] = r;
        }
    }
    let r = |i: usize, j: usize| corr[i * n + j];
    let mean_abs = |c: usize, active: &[usize]| {
        let others = active.iter().filter(|&&d| d != c);
        let count = active.len() - 1;
        if count == 0 {
            0.0
        } else {
            others.map(|&d| libm::fabs(r(c, d))).sum::<f64>() / count as f64
        }
    };

    loop {
        let mut worst: Option<(usize, usize, f64)> = None;
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                let v = libm::fabs(r(i, j));
                if v > threshold && worst.is_none_or(|(_, _, w)| v > w) {
                    worst = Some((i, j, v));
                }
            }
        }
        let Some((i, j, _)) = worst else { break };
        let (mi, mj) = (mean_abs(i, &active), mean_abs(j, &active));
        let (drop, keep) = if mi > mj { (i, j) } else { (j, i) };
        dropped.push(DroppedColumn {
            dropped: names[drop].clone(),
            kept: Some(names[keep].clone()),
            r: Some(r(i, j)),
            reason: DropReason::Correlated,
        });
        active.retain(|&c| c != drop);
    }

    Ok(PruneOutcome {
        matrix: matrix.select_columns(&active),
        dropped,
    })
}
