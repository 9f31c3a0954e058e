mod common;

use boostlens_core::dataset::{
    encode_features, pearson_correlation, prune_correlated, screen_invalid, synthesize,
    ColumnKind, FeatureMatrix, PlantedLogit, Rejection, RuleId, ScreenConfig, SurveyDataset,
    SurveySchema, SynthConfig, Term,
};
use proptest::prelude::*;
use rand::Rng;

use common::rng;

fn series(seed: u64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let x: Vec<f64> = (0..m).map(|_| r.random_range(-5.0..5.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.3 * v + r.random_range(-2.0..2.0)).collect();
    (x, y)
}

fn column(ds: &SurveyDataset, name: &str) -> Vec<f64> {
    let j = ds.schema.index_of(name).unwrap();
    let col = &ds.schema.columns[j];
    ds.records.iter().map(|r| col.parse(&r.values[j]).unwrap()).collect()
}

const AGE_MIDPOINTS: [(&str, f64); 7] = [
    ("<18", 16.0),
    ("18-24", 21.0),
    ("25-34", 29.5),
    ("35-44", 39.5),
    ("45-54", 49.5),
    ("55-64", 59.5),
    (">=65", 70.0),
];

/// Corrupts synthesized records and returns the rules each one should trip.
fn corrupted(seed: u64) -> (SurveyDataset, Vec<Vec<RuleId>>) {
    let schema = SurveySchema::table2();
    let config = SynthConfig { rows: 120, ..SynthConfig::table2() };
    let mut ds = synthesize(&schema, &config, seed).unwrap();
    let likert: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ColumnKind::Likert7)
        .map(|(i, _)| i)
        .collect();
    let age = schema.index_of("Age").unwrap();
    let years = schema.index_of("YearsDriving").unwrap();
    let mut r = rng(seed);
    let mut expected = Vec::new();
    for rec in &mut ds.records {
        let mut want = Vec::new();
        if r.random_bool(0.2) {
            let a = AGE_MIDPOINTS.iter().find(|(l, _)| *l == rec.values[age]).unwrap().1;
            rec.values[years] = format!("{}", a - 14.0 + 1.0);
        }
        let straight = r.random_bool(0.15);
        if straight {
            for &j in &likert {
                rec.values[j] = "3".into();
            }
        }
        let bad = r.random_bool(0.2);
        if bad {
            let j = likert[r.random_range(0..likert.len())];
            rec.values[j] = ["", "abc", "0", "8", "2.5"][r.random_range(0..5)].into();
        }
        let fast = r.random_bool(0.2);
        rec.completion_seconds = Some(if fast { 30.0 } else { 300.0 });

        let a = AGE_MIDPOINTS.iter().find(|(l, _)| *l == rec.values[age]).unwrap().1;
        let y: f64 = rec.values[years].parse().unwrap();
        if y > a - 14.0 {
            want.push(RuleId::DrivingExceedsAge);
        }
        if bad {
            want.push(RuleId::InvalidValue);
        }
        if straight && !bad {
            want.push(RuleId::StraightLining);
        }
        if fast {
            want.push(RuleId::TooFast);
        }
        expected.push(want);
    }
    (ds, expected)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pearson_symmetry_affinity_and_sign(seed in any::<u64>(), a in 0.1f64..10.0, b in -10.0f64..10.0) {
        let (x, y) = series(seed, 50);
        let r = pearson_correlation(&x, &y).unwrap();
        prop_assert!((r - pearson_correlation(&y, &x).unwrap()).abs() < 1e-12);
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((r - pearson_correlation(&ax, &y).unwrap()).abs() < 1e-12);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert!((r + pearson_correlation(&x, &neg).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn pruning_leaves_no_pair_above_threshold(seed in any::<u64>(), threshold in 0.3f64..0.95) {
        let mut r = rng(seed);
        let n = r.random_range(2..=7);
        let base: Vec<f64> = (0..60).map(|_| r.random_range(-1.0..1.0)).collect();
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| (0..n).map(|j| base[i] * j as f64 * 0.4 + r.random_range(-1.0..1.0)).collect())
            .collect();
        let m = FeatureMatrix::new((0..n).map(|j| format!("c{j}")).collect(), rows).unwrap();
        let out = prune_correlated(&m, threshold).unwrap();
        prop_assert_eq!(out.matrix.n_features() + out.dropped.len(), n);
        let k = out.matrix.n_features();
        for i in 0..k {
            for j in i + 1..k {
                let rij = pearson_correlation(&out.matrix.column(i), &out.matrix.column(j)).unwrap();
                prop_assert!(rij.abs() <= threshold);
            }
        }
        prop_assert!(prune_correlated(&out.matrix, threshold).unwrap().dropped.is_empty());
    }

    #[test]
    fn screening_matches_rule_by_rule_rescan(seed in any::<u64>()) {
        let (ds, expected) = corrupted(seed);
        let once = screen_invalid(&ds, &ScreenConfig::default());
        let mut want: Vec<Rejection> = Vec::new();
        for (rec, rules) in ds.records.iter().zip(&expected) {
            want.extend(rules.iter().map(|&rule| Rejection { index: rec.index, rule }));
        }
        prop_assert_eq!(&once.rejection_log, &want);
        let kept: Vec<usize> = once.records.iter().map(|r| r.index).collect();
        let rejected = once.rejected_indices();
        prop_assert!(kept.iter().all(|i| rejected.binary_search(i).is_err()));
        prop_assert_eq!(kept.len() + rejected.len(), ds.records.len());
        prop_assert_eq!(screen_invalid(&once, &ScreenConfig::default()), once);
    }
}

#[test]
fn synthesis_is_deterministic_and_plants_the_pair() {
    let schema = SurveySchema::table2();
    let config = SynthConfig::table2();
    assert_eq!(config.rows, 2000);
    for seed in 0..5 {
        let a = synthesize(&schema, &config, seed).unwrap();
        assert_eq!(a, synthesize(&schema, &config, seed).unwrap());
        let r = pearson_correlation(&column(&a, "Age"), &column(&a, "YearsDriving")).unwrap();
        assert!((0.83..=0.93).contains(&r), "seed {seed}: r = {r}");
        let r = pearson_correlation(&column(&a, "Fear"), &column(&a, "Nervousness")).unwrap();
        assert!((r - 0.87).abs() < 0.05, "seed {seed}: r = {r}");
    }
    assert_ne!(
        synthesize(&schema, &config, 0).unwrap(),
        synthesize(&schema, &config, 1).unwrap()
    );
}

#[test]
fn noiseless_single_feature_logit_thresholds_that_feature() {
    let schema = SurveySchema::table2();
    let config = SynthConfig {
        rows: 500,
        correlated_pairs: Vec::new(),
        logit: PlantedLogit {
            main_effects: vec![Term { column: "Benefit".into(), coef: 1.0, center: 4.0 }],
            ..PlantedLogit::default()
        },
        ..SynthConfig::table2()
    };
    let ds = synthesize(&schema, &config, 2).unwrap();
    let benefit = column(&ds, "Benefit");
    let trust = column(&ds, "Trust");
    for (b, t) in benefit.iter().zip(&trust) {
        assert_eq!(*t >= 5.0, *b >= 5.0);
        assert_eq!(*t == 4.0, *b == 4.0);
    }
    let (x, y) = encode_features(&ds).unwrap();
    let j = x.names().iter().position(|n| n == "Benefit").unwrap();
    for i in 0..x.n_rows() {
        assert_eq!(y.get(i), x.get(i, j) >= 5.0);
    }
}

#[test]
fn encoding_drops_neutral_rows_and_keeps_columns() {
    let schema = SurveySchema::table2();
    let ds = screen_invalid(
        &synthesize(&schema, &SynthConfig::table2(), 8).unwrap(),
        &ScreenConfig::default(),
    );
    let neutral = column(&ds, "Trust").iter().filter(|&&t| t == 4.0).count();
    let (x, y) = encode_features(&ds).unwrap();
    assert_eq!(x.n_rows(), ds.records.len() - neutral);
    assert_eq!(y.len(), x.n_rows());
    assert_eq!(x.n_features(), 23);
    let pruned = prune_correlated(&x, 0.85).unwrap();
    let names: Vec<&str> = pruned.dropped.iter().map(|d| d.dropped.as_str()).collect();
    assert_eq!(names.len(), 2);
    assert!(names[0] == "Age" || names[0] == "YearsDriving");
    assert!(names[1] == "Fear" || names[1] == "Nervousness");
    assert_eq!(pruned.matrix.n_features(), 21);
}

#[test]
fn yes_no_cells_encode_to_binary() {
    let schema = SurveySchema::table2();
    let col = &schema.columns[schema.index_of("BeeninAV").unwrap()];
    assert_eq!(col.parse("Yes"), Ok(1.0));
    assert_eq!(col.parse("No"), Ok(0.0));
}
