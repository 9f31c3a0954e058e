use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabelVector;
use crate::error::{Error, Result};

/// A partition of row indices into `k` folds, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    pub seed: u64,
    pub stratified: bool,
    pub folds: Vec<Vec<usize>>,
}

impl Folds {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Rows outside fold `f`, ascending.
    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, fold)| fold.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

/// Shuffles rows with the seeded generator and deals them to folds in turn.
/// When stratified, positives are dealt first and negatives continue the
/// rotation, so fold sizes and per-fold class counts each differ by at most
/// one.
pub fn make_folds(labels: &LabelVector, k: usize, seed: u64, stratified: bool) -> Result<Folds> {
    if k < 2 {
        return Err(Error::InvalidConfig("folds must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        let mut by_class = Vec::new();
        for class in [true, false] {
            let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels.get(i) == class).collect();
            if idx.len() < k {
                return Err(Error::InfeasibleStratification {
                    class: class as u8,
                    count: idx.len(),
                    k,
                });
            }
            by_class.push(idx);
        }
        by_class
    } else {
        if labels.len() < k {
            return Err(Error::InvalidConfig(alloc::format!(
                "{k} folds need at least {k} rows, got {}",
                labels.len()
            )));
        }
        alloc::vec![(0..labels.len()).collect()]
    };
    let mut folds = alloc::vec![Vec::new(); k];
    let mut next = 0;
    for mut group in groups {
        group.shuffle(&mut rng);
        for row in group {
            folds[next].push(row);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(Folds {
        seed,
        stratified,
        folds,
    })
}
