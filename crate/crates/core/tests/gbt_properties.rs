mod common;

use boostlens_core::dataset::{FeatureMatrix, LabelVector, SynthConfig};
use boostlens_core::gbt::{
    find_best_split, grow_tree, leaf_weight, logistic_grad_hess, prune_tree, split_gain, train,
    train_traced, DecisionTree, GradHess, NodeKind, TrainConfig,
};
use proptest::prelude::*;
use rand::Rng;

use common::{brute_split, matrix, planted, rng};

fn instance(seed: u64) -> (FeatureMatrix, Vec<f64>, Vec<f64>, TrainConfig) {
    let mut r = rng(seed);
    let m = r.random_range(2..=50);
    let n = r.random_range(1..=6);
    let levels = r.random_range(2..=6);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| r.random_range(0..levels) as f64).collect())
        .collect();
    let (grad, hess): (Vec<f64>, Vec<f64>) = (0..m)
        .map(|_| logistic_grad_hess(r.random_range(-2.0..2.0), r.random_bool(0.5)))
        .unzip();
    let cfg = TrainConfig {
        max_depth: r.random_range(1..=4),
        lambda: [0.0, 0.5, 1.0, 3.0][r.random_range(0..4)],
        gamma: [0.0, 0.01, 0.1][r.random_range(0..3)],
        min_child_rows: r.random_range(1..=3),
        ..TrainConfig::default()
    };
    (matrix(rows), grad, hess, cfg)
}

fn rows_at(tree: &DecisionTree, x: &FeatureMatrix, node: usize) -> Vec<usize> {
    // Rows whose descent passes through `node`.
    (0..x.n_rows())
        .filter(|&i| {
            let mut at = 0;
            loop {
                if at == node {
                    return true;
                }
                match tree.nodes[at].kind {
                    NodeKind::Leaf { .. } => return false,
                    NodeKind::Split(s) => {
                        at = if x.get(i, s.feature) < s.threshold { s.left } else { s.right };
                    }
                }
            }
        })
        .collect()
}

fn depth_of(tree: &DecisionTree, node: usize) -> usize {
    let mut parent = vec![usize::MAX; tree.nodes.len()];
    for (i, n) in tree.nodes.iter().enumerate() {
        if let NodeKind::Split(s) = n.kind {
            parent[s.left] = i;
            parent[s.right] = i;
        }
    }
    let (mut d, mut at) = (0, node);
    while at != 0 {
        at = parent[at];
        d += 1;
    }
    d
}

fn check_covers(tree: &DecisionTree) {
    for n in &tree.nodes {
        if let NodeKind::Split(s) = n.kind {
            assert_eq!(tree.nodes[s.left].cover + tree.nodes[s.right].cover, n.cover);
            assert!(s.gain > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn root_split_matches_exhaustive_search(seed in any::<u64>()) {
        let (x, g, h, cfg) = instance(seed);
        let rows: Vec<usize> = (0..x.n_rows()).collect();
        let want = brute_split(&rows, &x, &g, &h, &cfg);
        let got = find_best_split(&rows, &x, &g, &h, &cfg);
        match (want, got) {
            (None, None) => {}
            (Some((f, t, gain)), Some(c)) => {
                prop_assert_eq!(c.feature, f);
                prop_assert_eq!(c.threshold, t);
                prop_assert!((c.gain - gain).abs() < 1e-12 * (1.0 + gain));
            }
            (w, g) => prop_assert!(false, "oracle {:?} vs search {:?}", w, g),
        }
    }

    #[test]
    fn every_grown_node_matches_exhaustive_search(seed in any::<u64>()) {
        let (x, g, h, cfg) = instance(seed);
        let tree = grow_tree(&g, &h, &x, &cfg).unwrap();
        for (i, node) in tree.nodes.iter().enumerate() {
            let rows = rows_at(&tree, &x, i);
            prop_assert_eq!(node.cover, rows.len());
            let want = brute_split(&rows, &x, &g, &h, &cfg);
            match node.kind {
                NodeKind::Split(s) => {
                    let (f, t, gain) = want.expect("oracle finds a split");
                    prop_assert_eq!((s.feature, s.threshold), (f, t));
                    prop_assert!(s.gain > 0.0);
                    prop_assert!((s.gain - gain).abs() < 1e-12 * (1.0 + gain));
                }
                NodeKind::Leaf { weight } => {
                    prop_assert!(want.is_none() || depth_of(&tree, i) == cfg.max_depth);
                    let acc = GradHess::from_rows(&rows, &g, &h);
                    prop_assert!((weight - leaf_weight(&acc, cfg.lambda).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pruning_is_idempotent_and_keeps_positive_gains(seed in any::<u64>()) {
        let (x, g, h, cfg) = instance(seed);
        let tree = grow_tree(&g, &h, &x, &TrainConfig { gamma: 0.0, ..cfg.clone() }).unwrap();
        let once = prune_tree(&tree, cfg.lambda, cfg.gamma + 0.05);
        let twice = prune_tree(&once, cfg.lambda, cfg.gamma + 0.05);
        prop_assert_eq!(&once, &twice);
        check_covers(&once);
        for n in &once.nodes {
            if let NodeKind::Split(s) = n.kind {
                let gain = split_gain(&once.nodes[s.left].stats(), &once.nodes[s.right].stats(), cfg.lambda, cfg.gamma + 0.05);
                prop_assert!(gain > 0.0);
            }
        }
    }

    #[test]
    fn trained_ensembles_are_additive_and_well_formed(seed in any::<u64>()) {
        let (x, _, _, cfg) = instance(seed);
        let mut r = rng(seed ^ 0x5eed);
        let mut labels: Vec<bool> = (0..x.n_rows()).map(|_| r.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let y = LabelVector::new(labels);
        let cfg = TrainConfig { num_rounds: 8, ..cfg };
        let e = train(&x, &y, &cfg).unwrap();
        prop_assert_eq!(e.trees.len(), 8);
        prop_assert_eq!(e.base_margin, 0.0);
        for t in &e.trees {
            check_covers(t);
        }
        for row in x.rows() {
            let sum: f64 = e.tree_outputs(row).unwrap().iter().sum();
            prop_assert!((e.predict_margin(row).unwrap() - cfg.learning_rate * sum).abs() < 1e-12);
            let p = e.predict_proba(row).unwrap();
            prop_assert!(p > 0.0 && p < 1.0);
        }
        prop_assert_eq!(train(&x, &y, &cfg).unwrap(), e);
    }
}

#[test]
fn exact_ties_go_to_the_lowest_feature() {
    let x = matrix(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]]);
    let (g, h): (Vec<f64>, Vec<f64>) = [false, true, false, true]
        .iter()
        .map(|&y| logistic_grad_hess(0.0, y))
        .unzip();
    let c = find_best_split(&[0, 1, 2, 3], &x, &g, &h, &TrainConfig::default()).unwrap();
    assert_eq!((c.feature, c.threshold), (0, 0.5));
}

#[test]
fn axis_rule_is_learned_within_ten_rounds() {
    let mut r = rng(11);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let y = LabelVector::new(rows.iter().map(|v| v[0] > 0.0).collect());
    let x = matrix(rows);
    let e = train(&x, &y, &TrainConfig { num_rounds: 10, ..TrainConfig::default() }).unwrap();
    let correct = (0..x.n_rows())
        .filter(|&i| (e.predict_proba(x.row(i)).unwrap() >= 0.5) == y.get(i))
        .count();
    assert_eq!(correct, 200);
}

#[test]
fn training_loss_never_rises_over_sixty_rounds() {
    for seed in 0..3 {
        let (x, y) = planted(&SynthConfig::table2(), seed);
        let (e, trace) = train_traced(&x, &y, &TrainConfig::default()).unwrap();
        assert_eq!(e.trees.len(), 60);
        assert_eq!(trace.losses.len(), 61);
        for w in trace.losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "loss rose from {} to {}", w[0], w[1]);
        }
        assert!(trace.losses[60] < trace.losses[0]);
    }
}

#[test]
fn zero_rounds_give_a_constant_model() {
    let x = matrix(vec![vec![0.0], vec![1.0]]);
    let y = LabelVector::new(vec![false, true]);
    let e = train(&x, &y, &TrainConfig { num_rounds: 0, ..TrainConfig::default() }).unwrap();
    assert!(e.trees.is_empty());
    assert_eq!(e.predict_proba(&[7.0]).unwrap(), 0.5);
}

#[test]
fn single_class_labels_are_rejected() {
    let x = matrix(vec![vec![0.0], vec![1.0]]);
    let y = LabelVector::new(vec![true, true]);
    assert!(train(&x, &y, &TrainConfig::default()).is_err());
}
