use alloc::vec::Vec;

use super::{score, split_gain, GradHess, TrainConfig};
use crate::dataset::FeatureMatrix;

/// Gains within this fraction of the parent's score scale are treated as
/// ties and resolved by (feature, threshold) order.
pub(crate) const GAIN_TIE_REL: f64 = 1e-12;

/// Best split found for a node, before it is placed in a tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: GradHess,
    pub right: GradHess,
}

/// Threshold strictly between `lo` and `hi` such that `lo < t <= hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo && mid <= hi {
        mid
    } else {
        hi
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    pos: usize,
    threshold: f64,
    gain: f64,
}

/// Scans one feature whose rows are sorted by value and appends every
/// admissible boundary between consecutive distinct values.
fn scan_feature(
    feature: usize,
    sorted: &[usize],
    matrix: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    config: &TrainConfig,
    prefix: &mut Vec<GradHess>,
    out: &mut Vec<Candidate>,
) {
    let m = sorted.len();
    if m < 2 {
        return;
    }
    prefix.clear();
    let mut acc = GradHess::default();
    for &r in sorted {
        acc.add(grad[r], hess[r]);
        prefix.push(acc);
    }
    let mut suffix = GradHess::default();
    // Walk right to left so the right-hand sums are accumulated directly
    // instead of being derived by subtraction.
    let mut right_sums = Vec::with_capacity(m);
    for &r in sorted.iter().rev() {
        suffix.add(grad[r], hess[r]);
        right_sums.push(suffix);
    }
    right_sums.reverse();
    let min = config.min_child_rows;
    for k in 0..m - 1 {
        let lo = matrix.get(sorted[k], feature);
        let hi = matrix.get(sorted[k + 1], feature);
        if !(lo < hi) {
            continue;
        }
        let left = prefix[k];
        let right = right_sums[k + 1];
        if left.rows < min || right.rows < min {
            continue;
        }
        if left.hess + config.lambda <= 0.0 || right.hess + config.lambda <= 0.0 {
            continue;
        }
        let gain = split_gain(&left, &right, config.lambda, config.gamma);
        if gain.is_finite() {
            out.push(Candidate {
                feature,
                pos: k,
                threshold: midpoint(lo, hi),
                gain,
            });
        }
    }
}

/// Picks the winning candidate: among positive gains, the first in
/// (feature, threshold) order whose gain is within tolerance of the maximum.
fn choose(candidates: &[Candidate], node: &GradHess, lambda: f64) -> Option<Candidate> {
    let max = candidates
        .iter()
        .map(|c| c.gain)
        .filter(|&g| g > 0.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let tol = GAIN_TIE_REL * (1.0 + score(node.grad, node.hess, lambda));
    candidates
        .iter()
        .copied()
        .filter(|c| c.gain > 0.0 && c.gain >= max - tol)
        .min_by(|a, b| {
            a.feature
                .cmp(&b.feature)
                .then(a.threshold.total_cmp(&b.threshold))
        })
}

/// Best split over per-feature sorted row lists that all hold the same rows.
pub(crate) fn best_split_sorted(
    sorted: &[Vec<usize>],
    node: &GradHess,
    matrix: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    config: &TrainConfig,
) -> Option<SplitCandidate> {
    let mut candidates = Vec::new();
    let mut prefix = Vec::new();
    for (f, rows) in sorted.iter().enumerate() {
        scan_feature(f, rows, matrix, grad, hess, config, &mut prefix, &mut candidates);
    }
    let best = choose(&candidates, node, config.lambda)?;
    let rows = &sorted[best.feature];
    let left = GradHess::from_rows(&rows[..=best.pos], grad, hess);
    let right = GradHess::from_rows(&rows[best.pos + 1..], grad, hess);
    Some(SplitCandidate {
        feature: best.feature,
        threshold: best.threshold,
        gain: best.gain,
        left,
        right,
    })
}

/// Rows sorted by the value of `feature`, ties by row index.
pub(crate) fn sort_rows(rows: &[usize], matrix: &FeatureMatrix, feature: usize) -> Vec<usize> {
    let mut out = rows.to_vec();
    out.sort_by(|&a, &b| {
        matrix
            .get(a, feature)
            .total_cmp(&matrix.get(b, feature))
            .then(a.cmp(&b))
    });
    out
}

/// Exact greedy search over every feature and every midpoint between
/// consecutive distinct values of `rows`.
///
/// Returns `None` when no candidate has positive gain or every candidate
/// leaves a child with fewer than `min_child_rows` rows. Equal gains go to
/// the lowest feature index, then the lowest threshold.
pub fn find_best_split(
    rows: &[usize],
    matrix: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    config: &TrainConfig,
) -> Option<SplitCandidate> {
    if rows.is_empty() {
        return None;
    }
    let sorted: Vec<Vec<usize>> = (0..matrix.n_features())
        .map(|f| sort_rows(rows, matrix, f))
        .collect();
    let mut ascending = rows.to_vec();
    ascending.sort_unstable();
    let node = GradHess::from_rows(&ascending, grad, hess);
    best_split_sorted(&sorted, &node, matrix, grad, hess, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::logistic_grad_hess;
    use alloc::string::String;

    fn matrix(cols: &[&[f64]]) -> FeatureMatrix {
        let names = (0..cols.len()).map(|i| alloc::format!("f{i}")).collect::<Vec<String>>();
        let m = cols[0].len();
        let rows = (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        FeatureMatrix::new(names, rows).unwrap()
    }

    fn gh(labels: &[bool]) -> (Vec<f64>, Vec<f64>) {
        labels.iter().map(|&y| logistic_grad_hess(0.0, y)).unzip()
    }

    #[test]
    fn constant_features_have_no_split() {
        let m = matrix(&[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]]);
        let (g, h) = gh(&[true, false, true]);
        assert!(find_best_split(&[0, 1, 2], &m, &g, &h, &TrainConfig::default()).is_none());
    }

    #[test]
    fn xor_root_has_no_positive_split() {
        // Hand oracle: every axis split puts one positive and one negative
        // on each side, so G_L = G_R = 0 and the gain is exactly -gamma.
        let m = matrix(&[&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 0.0, 1.0]]);
        let (g, h) = gh(&[false, true, true, false]);
        let cfg = TrainConfig {
            gamma: 0.1,
            ..TrainConfig::default()
        };
        assert!(find_best_split(&[0, 1, 2, 3], &m, &g, &h, &cfg).is_none());
        let cfg = TrainConfig {
            gamma: 0.0,
            ..TrainConfig::default()
        };
        assert!(find_best_split(&[0, 1, 2, 3], &m, &g, &h, &cfg).is_none());
    }

    #[test]
    fn separable_one_d_threshold_is_midpoint() {
        // Candidates 1.5, 3.0, 4.5. With g = -/+0.5, h = 0.25, lambda = 1:
        //   t = 3.0: 0.5 * (1/1.5 + 1/1.5 - 0) = 0.6667
        //   t = 1.5: 0.5 * (0.25/1.25 + 0.25/1.75 - 0) = 0.1714
        let m = matrix(&[&[1.0, 2.0, 4.0, 5.0]]);
        let (g, h) = gh(&[false, false, true, true]);
        let s = find_best_split(&[0, 1, 2, 3], &m, &g, &h, &TrainConfig::default()).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 3.0);
        assert!((s.gain - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.left.rows, 2);
        assert_eq!(s.right.rows, 2);
    }

    #[test]
    fn equal_gains_prefer_lowest_feature() {
        let col = [1.0, 2.0, 4.0, 5.0];
        let m = matrix(&[&col, &col]);
        let (g, h) = gh(&[false, false, true, true]);
        let s = find_best_split(&[0, 1, 2, 3], &m, &g, &h, &TrainConfig::default()).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn min_child_rows_blocks_small_children() {
        let m = matrix(&[&[1.0, 2.0, 3.0]]);
        let (g, h) = gh(&[false, true, true]);
        let cfg = TrainConfig {
            min_child_rows: 2,
            ..TrainConfig::default()
        };
        assert!(find_best_split(&[0, 1, 2], &m, &g, &h, &cfg).is_none());
    }

    #[test]
    fn midpoint_stays_strictly_above_lower_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = midpoint(lo, hi);
        assert!(lo < t && t <= hi);
        assert_eq!(midpoint(2.0, 4.0), 3.0);
    }
}
