#![allow(dead_code)]

use boostlens_core::gbt::{split_gain, DecisionTree, Ensemble, GradHess, Node, NodeKind, Split, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grow(nodes: &mut Vec<Node>, rng: &mut ChaCha8Rng, used: &[usize], depth: usize, cover: usize) -> usize {
    if depth == 0 || cover < 2 || rng.random_bool(0.2) {
        let w = rng.random_range(-2.0..2.0);
        nodes.push(Node::leaf(w, GradHess::new(0.0, 1.0, cover)));
        return nodes.len() - 1;
    }
    let at = nodes.len();
    nodes.push(Node::leaf(0.0, GradHess::new(0.0, 1.0, cover)));
    let feature = used[rng.random_range(0..used.len())];
    let threshold = rng.random_range(0..4) as f64 + 0.5;
    let lc = rng.random_range(1..cover);
    let left = grow(nodes, rng, used, depth - 1, lc);
    let right = grow(nodes, rng, used, depth - 1, cover - lc);
    nodes[at].kind = NodeKind::Split(Split {
        feature,
        threshold,
        gain: 1.0,
        left,
        right,
    });
    at
}

pub fn random_tree(rng: &mut ChaCha8Rng, used: &[usize], max_depth: usize) -> DecisionTree {
    let mut nodes = Vec::new();
    let cover = rng.random_range(8..200);
    grow(&mut nodes, rng, used, max_depth, cover);
    DecisionTree { nodes }
}

/// Ensemble over `n` features of which only `used` appear in splits.
pub fn random_ensemble_on(rng: &mut ChaCha8Rng, n: usize, used: &[usize], trees: usize, max_depth: usize) -> Ensemble {
    Ensemble {
        feature_names: (0..n).map(|i| format!("f{i}")).collect(),
        base_margin: rng.random_range(-1.0..1.0),
        learning_rate: rng.random_range(0.05..1.0),
        trees: (0..trees).map(|_| random_tree(rng, used, max_depth)).collect(),
    }
}

/// Up to 10 features, 1..=5 trees, depth up to 3; some features unused.
pub fn random_ensemble(rng: &mut ChaCha8Rng) -> Ensemble {
    let n = rng.random_range(1..=10);
    let mut used: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
    if used.is_empty() {
        used.push(rng.random_range(0..n));
    }
    let trees = rng.random_range(1..=5);
    let depth = rng.random_range(1..=3);
    random_ensemble_on(rng, n, &used, trees, depth)
}

/// Values on a half-integer grid, so some land exactly on thresholds.
pub fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..9) as f64 / 2.0).collect()
}

use boostlens_core::dataset::{
    encode_features, screen_invalid, synthesize, FeatureMatrix, LabelVector, ScreenConfig,
    SurveySchema, SynthConfig,
};

/// Synthetic survey with the built-in planted effects, screened and encoded.
pub fn planted(config: &SynthConfig, seed: u64) -> (FeatureMatrix, LabelVector) {
    let schema = SurveySchema::table2();
    let raw = synthesize(&schema, config, seed).unwrap();
    let clean = screen_invalid(&raw, &ScreenConfig::default());
    encode_features(&clean).unwrap()
}

pub fn matrix(rows: Vec<Vec<f64>>) -> FeatureMatrix {
    let n = rows[0].len();
    FeatureMatrix::new((0..n).map(|i| format!("f{i}")).collect(), rows).unwrap()
}

/// Oracle split: every (feature, midpoint) pair, sums taken directly over
/// the rows on each side.
pub fn brute_split(
    rows: &[usize],
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    cfg: &TrainConfig,
) -> Option<(usize, f64, f64)> {
    let mut all = Vec::new();
    for f in 0..x.n_features() {
        let mut values: Vec<f64> = rows.iter().map(|&r| x.get(r, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut l, mut r) = (GradHess::default(), GradHess::default());
            for &i in rows {
                if x.get(i, f) < t {
                    l.add(grad[i], hess[i]);
                } else {
                    r.add(grad[i], hess[i]);
                }
            }
            if l.rows < cfg.min_child_rows || r.rows < cfg.min_child_rows {
                continue;
            }
            let gain = split_gain(&l, &r, cfg.lambda, cfg.gamma);
            if gain > 0.0 {
                all.push((f, t, gain));
            }
        }
    }
    let best = all.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let parent = GradHess::from_rows(rows, grad, hess);
    let tol = 1e-12 * (1.0 + parent.grad * parent.grad / (parent.hess + cfg.lambda));
    all.into_iter()
        .filter(|c| c.2 >= best - tol)
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
}

