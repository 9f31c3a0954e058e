//! Classification metrics, stratified k-fold cross-validation, randomized
//! hyperparameter search, and side-by-side model comparison.

mod folds;
mod metrics;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{train_cart, train_logistic, CartModel, LinearModel, LogisticConfig};
use crate::dataset::{check_aligned, FeatureMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::gbt::{train, Ensemble, TrainConfig};
use crate::math::{mean, std_dev};

pub use folds::{make_folds, Folds};
pub use metrics::{confusion, evaluate, metrics, roc_auc, ConfusionMatrix, Degenerate, MetricSet};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gbt,
    Logistic,
    Cart,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gbt => "gbt",
            ModelKind::Logistic => "logistic",
            ModelKind::Cart => "cart",
        }
    }
}

/// A model family together with its training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum ModelSpec {
    Gbt(TrainConfig),
    Logistic(LogisticConfig),
    Cart(TrainConfig),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Gbt(_) => ModelKind::Gbt,
            ModelSpec::Logistic(_) => ModelKind::Logistic,
            ModelSpec::Cart(_) => ModelKind::Cart,
        }
    }

    pub fn fit(&self, matrix: &FeatureMatrix, labels: &LabelVector) -> Result<TrainedModel> {
        Ok(match self {
            ModelSpec::Gbt(c) => TrainedModel::Gbt(train(matrix, labels, c)?),
            ModelSpec::Logistic(c) => TrainedModel::Logistic(train_logistic(matrix, labels, c)?),
            ModelSpec::Cart(c) => TrainedModel::Cart(train_cart(matrix, labels, c)?),
        })
    }

    /// The three compared families, sharing one tree configuration.
    pub fn defaults(tree: &TrainConfig) -> Vec<ModelSpec> {
        alloc::vec![
            ModelSpec::Gbt(tree.clone()),
            ModelSpec::Logistic(LogisticConfig::default()),
            ModelSpec::Cart(tree.clone()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Gbt(Ensemble),
    Logistic(LinearModel),
    Cart(CartModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Gbt(_) => ModelKind::Gbt,
            TrainedModel::Logistic(_) => ModelKind::Logistic,
            TrainedModel::Cart(_) => ModelKind::Cart,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Gbt(e) => &e.feature_names,
            TrainedModel::Logistic(m) => &m.feature_names,
            TrainedModel::Cart(c) => &c.ensemble.feature_names,
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        match self {
            TrainedModel::Gbt(e) => e.predict_proba(row),
            TrainedModel::Logistic(m) => m.predict_proba(row),
            TrainedModel::Cart(c) => c.predict_proba(row),
        }
    }

    pub fn scores(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        matrix.rows().map(|r| self.predict_proba(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub threshold: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_FOLDS,
            seed: 0,
            stratified: true,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// One value per metric; `roc_auc` is over the folds where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: f64,
    pub roc_auc: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Summary {
    fn reduce(sets: &[MetricSet], f: fn(&[f64]) -> f64) -> Self {
        let col = |g: fn(&MetricSet) -> f64| -> f64 {
            let v: Vec<f64> = sets.iter().map(g).collect();
            f(&v)
        };
        let auc: Vec<f64> = sets.iter().filter_map(|m| m.roc_auc).collect();
        Summary {
            accuracy: col(|m| m.accuracy),
            roc_auc: (!auc.is_empty()).then(|| f(&auc)),
            precision: col(|m| m.precision),
            recall: col(|m| m.recall),
            f1: col(|m| m.f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: ModelKind,
    pub spec: ModelSpec,
    pub k: usize,
    pub fold_seed: u64,
    pub stratified: bool,
    pub threshold: f64,
    pub folds: Vec<FoldReport>,
    pub mean: Summary,
    /// Population standard deviation across folds.
    pub std: Summary,
}

/// Cross-validates `spec` over a fixed partition. Folds may run in
/// parallel; the report lists them in fold order.
pub fn cross_validate<E: Executor>(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    spec: &ModelSpec,
    folds: &Folds,
    threshold: f64,
    exec: &E,
) -> Result<CvReport> {
    check_aligned(matrix, labels)?;
    let reports: Vec<FoldReport> = exec
        .map(folds.k(), |f| {
            let train_idx = folds.train_rows(f);
            let test_idx = &folds.folds[f];
            let model = spec.fit(&matrix.select_rows(&train_idx), &labels.select(&train_idx))?;
            let scores = model.scores(&matrix.select_rows(test_idx))?;
            let metrics = evaluate(&scores, &labels.select(test_idx), threshold)?;
            Ok(FoldReport {
                fold: f,
                train_rows: train_idx.len(),
                test_rows: test_idx.len(),
                metrics,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let sets: Vec<MetricSet> = reports.iter().map(|r| r.metrics).collect();
    Ok(CvReport {
        model: spec.kind(),
        spec: spec.clone(),
        k: folds.k(),
        fold_seed: folds.seed,
        stratified: folds.stratified,
        threshold,
        mean: Summary::reduce(&sets, mean),
        std: Summary::reduce(&sets, std_dev),
        folds: reports,
    })
}

pub fn kfold_cv<E: Executor>(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    spec: &ModelSpec,
    cv: &CvConfig,
    exec: &E,
) -> Result<CvReport> {
    check_aligned(matrix, labels)?;
    let folds = make_folds(labels, cv.k, cv.seed, cv.stratified)?;
    cross_validate(matrix, labels, spec, &folds, cv.threshold, exec)
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

/// Inclusive real range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatRange {
    pub min: f64,
    pub max: f64,
}

impl IntRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

impl FloatRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub num_rounds: IntRange,
    pub learning_rate: FloatRange,
    pub max_depth: IntRange,
    pub lambda: FloatRange,
    pub gamma: FloatRange,
    pub min_child_rows: IntRange,
    pub budget: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            num_rounds: IntRange { min: 20, max: 100 },
            learning_rate: FloatRange { min: 0.05, max: 0.5 },
            max_depth: IntRange { min: 2, max: 6 },
            lambda: FloatRange { min: 0.0, max: 5.0 },
            gamma: FloatRange { min: 0.0, max: 2.0 },
            min_child_rows: IntRange { min: 1, max: 1 },
            budget: 25,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("num_rounds", self.num_rounds),
            ("max_depth", self.max_depth),
            ("min_child_rows", self.min_child_rows),
        ];
        for (name, r) in ints {
            if r.min > r.max {
                return Err(Error::InvalidConfig(alloc::format!("{name}: empty range")));
            }
        }
        let reals = [
            ("learning_rate", self.learning_rate),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
        ];
        for (name, r) in reals {
            if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
                return Err(Error::InvalidConfig(alloc::format!("{name}: empty range")));
            }
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("budget must be >= 1".into()));
        }
        // Corner configurations cover every bound a sample can take.
        for corner in [self.corner(false), self.corner(true)] {
            corner.validate()?;
        }
        Ok(())
    }

    fn corner(&self, high: bool) -> TrainConfig {
        let pick_i = |r: IntRange| if high { r.max } else { r.min };
        let pick_f = |r: FloatRange| if high { r.max } else { r.min };
        TrainConfig {
            num_rounds: pick_i(self.num_rounds),
            learning_rate: pick_f(self.learning_rate),
            max_depth: pick_i(self.max_depth),
            lambda: pick_f(self.lambda),
            gamma: pick_f(self.gamma),
            min_child_rows: pick_i(self.min_child_rows),
            seed: 0,
        }
    }

    /// The `budget` configurations drawn for `seed`, in trial order.
    pub fn sample(&self, seed: u64) -> Result<Vec<TrainConfig>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..self.budget)
            .map(|_| TrainConfig {
                num_rounds: self.num_rounds.sample(&mut rng),
                learning_rate: self.learning_rate.sample(&mut rng),
                max_depth: self.max_depth.sample(&mut rng),
                lambda: self.lambda.sample(&mut rng),
                gamma: self.gamma.sample(&mut rng),
                min_child_rows: self.min_child_rows.sample(&mut rng),
                seed,
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial: usize,
    pub config: TrainConfig,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub search_seed: u64,
    pub best_trial: usize,
    pub best: TrainConfig,
    pub report: CvReport,
    pub trials: Vec<Trial>,
}

/// Evaluates each sampled configuration on the same folds and keeps the
/// highest mean accuracy; the earlier trial wins a tie.
pub fn random_search<E: Executor>(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    space: &SearchSpace,
    cv: &CvConfig,
    search_seed: u64,
    exec: &E,
) -> Result<SearchOutcome> {
    check_aligned(matrix, labels)?;
    let configs = space.sample(search_seed)?;
    let folds = make_folds(labels, cv.k, cv.seed, cv.stratified)?;
    let mut trials = Vec::with_capacity(configs.len());
    let mut best: Option<(usize, CvReport)> = None;
    for (i, config) in configs.into_iter().enumerate() {
        let report = cross_validate(matrix, labels, &ModelSpec::Gbt(config.clone()), &folds, cv.threshold, exec)?;
        let acc = report.mean.accuracy;
        trials.push(Trial {
            trial: i,
            config,
            mean_accuracy: acc,
        });
        if best.as_ref().is_none_or(|(_, b)| acc > b.mean.accuracy) {
            best = Some((i, report));
        }
    }
    let (best_trial, report) = best.expect("budget >= 1");
    Ok(SearchOutcome {
        search_seed,
        best_trial,
        best: trials[best_trial].config.clone(),
        report,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub k: usize,
    pub fold_seed: u64,
    pub reports: Vec<CvReport>,
}

impl Comparison {
    pub fn report(&self, kind: ModelKind) -> Option<&CvReport> {
        self.reports.iter().find(|r| r.model == kind)
    }
}

/// Cross-validates every model on one shared partition.
pub fn compare_models<E: Executor>(
    matrix: &FeatureMatrix,
    labels: &LabelVector,
    models: &[ModelSpec],
    cv: &CvConfig,
    exec: &E,
) -> Result<Comparison> {
    check_aligned(matrix, labels)?;
    let folds = make_folds(labels, cv.k, cv.seed, cv.stratified)?;
    let reports = models
        .iter()
        .map(|spec| cross_validate(matrix, labels, spec, &folds, cv.threshold, exec))
        .collect::<Result<_>>()?;
    Ok(Comparison {
        k: cv.k,
        fold_seed: cv.seed,
        reports,
    })
}
