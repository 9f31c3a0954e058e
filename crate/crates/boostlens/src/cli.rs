//! Command line front end. Every stage reads and writes files in an output
//! directory and records itself in that directory's manifest.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use boostlens_core::dataset::{
    encode_features, prune_correlated, screen_invalid, synthesize, FeatureMatrix,
    RuleId, ScreenConfig, SurveySchema, SynthConfig, DEFAULT_CORRELATION_THRESHOLD,
};
use boostlens_core::evalx::{
    compare_models, kfold_cv, random_search, CvConfig, ModelKind, ModelSpec, SearchSpace,
    TrainedModel, DEFAULT_FOLDS, DEFAULT_THRESHOLD,
};
use boostlens_core::baselines::LogisticConfig;
use boostlens_core::explain::{base_value, explain_rows, ExplainConfig, TreeExplainer};
use boostlens_core::gbt::TrainConfig;
use boostlens_core::report::{
    dependence_series, effect_sums, feature_importance, force_data, shap_correlations,
    summary_points, ExplanationBatch,
};
use boostlens_core::seeds::sub_seed;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result, EXIT_USAGE};
use crate::exec::Threads;
use crate::formats::{self, read_json, write_json, ExplanationsFile, ModelFile};
use crate::manifest::{digest, display_path, Manifest, StageRecord};
use crate::table;

pub const SURVEY_FILE: &str = "survey.csv";
pub const CLEANED_FILE: &str = "cleaned.csv";
pub const REJECTIONS_FILE: &str = "rejections.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const PRUNING_FILE: &str = "pruning.json";
pub const MODEL_FILE: &str = "model.json";
pub const SEARCH_FILE: &str = "search.json";
pub const EXPLANATIONS_FILE: &str = "explanations.json";

#[derive(Debug, Parser)]
#[command(name = "boostlens", version, about = "Survey trust modelling with boosted trees and exact Shapley explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic survey export
    Synth(SynthArgs),
    /// Screen, encode and prune a survey export
    Clean(CleanArgs),
    /// Train a model on an encoded feature table
    Train(TrainArgs),
    /// Cross-validate a model specification
    Eval(EvalArgs),
    /// Shapley attributions for every row of a feature table
    Explain(ExplainArgs),
    /// Importance, summary, dependence, effect and force-plot data
    Report(ReportArgs),
    /// Cross-validate boosted trees against the baselines
    Compare(CompareArgs),
    /// Run every stage in sequence
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Gbt,
    Logistic,
    Cart,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Gbt => ModelKind::Gbt,
            KindArg::Logistic => ModelKind::Logistic,
            KindArg::Cart => ModelKind::Cart,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, env = "BOOSTLENS_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Export format; both when omitted
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub synth_config: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Overrides the configured row count
    #[arg(long)]
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Survey export (CSV)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    /// Scores at or above this are predicted positive
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Encoded feature table (CSV)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Gbt)]
    pub kind: KindArg,
    /// Pick boosted-tree hyperparameters by randomized search
    #[arg(long)]
    pub search: bool,
    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    /// Take the specification from a trained model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KindArg::Gbt)]
    pub kind: KindArg,
    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Also compute pairwise interaction values
    #[arg(long)]
    pub interactions: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Explanations document from `explain`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "run")]
    pub run_id: String,
    /// Rows to emit force-plot records for
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub force_rows: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub cv: CvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    /// Existing survey export; a synthetic one is generated otherwise
    #[arg(long, conflicts_with = "synth_config")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub synth_config: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub interactions: bool,
    #[command(flatten)]
    pub cv: CvArgs,
    #[arg(long, default_value = "run")]
    pub run_id: String,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub force_rows: Vec<usize>,
}

/// Optional JSON configuration; omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub logistic: LogisticConfig,
    pub search: SearchSpace,
    pub screen: ScreenConfig,
    pub explain: ExplainConfig,
    pub correlation_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            logistic: LogisticConfig::default(),
            search: SearchSpace::default(),
            screen: ScreenConfig::default(),
            explain: ExplainConfig::default(),
            correlation_threshold: DEFAULT_CORRELATION_THRESHOLD,
        }
    }
}

struct Ctx {
    out: PathBuf,
    seed: u64,
    format: Option<Format>,
    config: RunConfig,
    exec: Threads,
}

impl Ctx {
    fn new(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(p) => read_json(p)?,
            None => RunConfig::default(),
        };
        fs::create_dir_all(&common.out).map_err(|e| Error::io(&common.out, e))?;
        let exec = Threads::new(common.threads)
            .map_err(|e| Error::Usage(format!("--threads {}: {e}", common.threads)))?;
        Ok(Self {
            out: common.out.clone(),
            seed: common.seed,
            format: common.format,
            config,
            exec,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn json(&self) -> bool {
        self.format != Some(Format::Csv)
    }

    fn csv(&self) -> bool {
        self.format != Some(Format::Json)
    }

    fn cv(&self, args: &CvArgs) -> CvConfig {
        CvConfig {
            k: args.folds,
            seed: sub_seed(self.seed, "folds"),
            stratified: true,
            threshold: args.threshold,
        }
    }
}

/// What a stage read, produced and was configured with.
struct Stage {
    inputs: Vec<PathBuf>,
    artifacts: Vec<PathBuf>,
    config: serde_json::Value,
    sub_seeds: Vec<&'static str>,
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("configuration serializes")
}

fn record(ctx: &Ctx, manifest: &mut Manifest, name: &str, stage: Stage) -> Result<()> {
    let entry = StageRecord {
        inputs: stage
            .inputs
            .iter()
            .map(|p| digest(p, &ctx.out))
            .collect::<Result<_>>()?,
        config: stage.config,
        seed: ctx.seed,
        sub_seeds: stage
            .sub_seeds
            .iter()
            .map(|n| (n.to_string(), sub_seed(ctx.seed, n)))
            .collect::<BTreeMap<_, _>>(),
        artifacts: stage
            .artifacts
            .iter()
            .map(|p| digest(p, &ctx.out))
            .collect::<Result<_>>()?,
    };
    manifest.stages.insert(name.to_string(), entry);
    Ok(())
}

fn load_schema(path: Option<&Path>) -> Result<SurveySchema> {
    match path {
        None => Ok(SurveySchema::table2()),
        Some(p) => {
            let schema: SurveySchema = read_json(p)?;
            schema.validate().context(|| p.display().to_string())?;
            Ok(schema)
        }
    }
}

fn synth_stage(ctx: &Ctx, schema_path: Option<&Path>, config_path: Option<&Path>, rows: Option<usize>) -> Result<Stage> {
    let schema = load_schema(schema_path)?;
    let mut config = match config_path {
        Some(p) => read_json::<SynthConfig>(p)?,
        None => SynthConfig::table2(),
    };
    if let Some(r) = rows {
        config.rows = r;
    }
    let data = synthesize(&schema, &config, sub_seed(ctx.seed, "data")).context(|| {
        config_path.map_or("built-in synthesis config".into(), |p| p.display().to_string())
    })?;
    let out = ctx.path(SURVEY_FILE);
    table::write_survey(&out, &data)?;
    let mut inputs: Vec<PathBuf> = Vec::new();
    inputs.extend(schema_path.map(Path::to_path_buf));
    inputs.extend(config_path.map(Path::to_path_buf));
    Ok(Stage {
        inputs,
        artifacts: vec![out],
        config: to_value(&config),
        sub_seeds: vec!["data"],
    })
}

#[derive(Serialize)]
struct RejectionReport<'a> {
    input: String,
    rows: usize,
    retained: usize,
    rejected: usize,
    neutral_trust_excluded: usize,
    per_rule: BTreeMap<&'static str, usize>,
    records: Vec<RejectedRecord<'a>>,
}

#[derive(Serialize)]
struct RejectedRecord<'a> {
    index: usize,
    rules: Vec<&'a str>,
}

#[derive(Serialize)]
struct PruningReport<'a> {
    threshold: f64,
    kept: &'a [String],
    dropped: &'a [boostlens_core::dataset::DroppedColumn],
}

fn clean_stage(ctx: &Ctx, input: &Path, schema_path: Option<&Path>) -> Result<Stage> {
    let schema = load_schema(schema_path)?;
    let raw = table::load_csv(input, &schema)?;
    let screened = screen_invalid(&raw, &ctx.config.screen);
    let ctx_name = || input.display().to_string();
    let (matrix, labels) = encode_features(&screened).context(ctx_name)?;
    let pruned = prune_correlated(&matrix, ctx.config.correlation_threshold).context(ctx_name)?;

    let rejected = screened.rejected_indices();
    let mut per_rule = BTreeMap::new();
    for r in &screened.rejection_log {
        *per_rule.entry(r.rule.code()).or_insert(0) += 1;
    }
    let records = rejected
        .iter()
        .map(|&index| RejectedRecord {
            index,
            rules: screened
                .rejection_log
                .iter()
                .filter(|r| r.index == index)
                .map(|r| RuleId::code(r.rule))
                .collect(),
        })
        .collect();
    let report = RejectionReport {
        input: display_path(input, &ctx.out),
        rows: screened.records.len() + rejected.len(),
        retained: screened.records.len(),
        rejected: rejected.len(),
        neutral_trust_excluded: screened.records.len() - labels.len(),
        per_rule,
        records,
    };
    let cleaned = ctx.path(CLEANED_FILE);
    let rejections = ctx.path(REJECTIONS_FILE);
    let features = ctx.path(FEATURES_FILE);
    let pruning = ctx.path(PRUNING_FILE);
    table::write_survey(&cleaned, &screened)?;
    write_json(&rejections, &report)?;
    table::write_features(&features, &pruned.matrix, &labels)?;
    write_json(
        &pruning,
        &PruningReport {
            threshold: ctx.config.correlation_threshold,
            kept: pruned.matrix.names(),
            dropped: &pruned.dropped,
        },
    )?;
    let mut inputs = vec![input.to_path_buf()];
    inputs.extend(schema_path.map(Path::to_path_buf));
    Ok(Stage {
        inputs,
        artifacts: vec![cleaned, rejections, features, pruning],
        config: serde_json::json!({
            "screen": to_value(&ctx.config.screen),
            "correlation_threshold": ctx.config.correlation_threshold,
        }),
        sub_seeds: vec![],
    })
}

fn spec_for(ctx: &Ctx, kind: ModelKind, train: &TrainConfig) -> ModelSpec {
    match kind {
        ModelKind::Gbt => ModelSpec::Gbt(train.clone()),
        ModelKind::Logistic => ModelSpec::Logistic(ctx.config.logistic.clone()),
        ModelKind::Cart => ModelSpec::Cart(train.clone()),
    }
}

fn train_stage(ctx: &Ctx, input: &Path, kind: ModelKind, search: bool, cv: &CvArgs) -> Result<Stage> {
    let (matrix, labels) = table::read_features(input)?;
    let ctx_name = || input.display().to_string();
    let mut artifacts = Vec::new();
    let mut sub_seeds = vec![];
    let mut train = ctx.config.train.clone();
    if search {
        if kind != ModelKind::Gbt {
            return Err(Error::Usage("--search applies to --kind gbt only".into()));
        }
        let outcome = random_search(
            &matrix,
            &labels,
            &ctx.config.search,
            &ctx.cv(cv),
            sub_seed(ctx.seed, "search"),
            &ctx.exec,
        )
        .context(ctx_name)?;
        train = outcome.best.clone();
        let path = ctx.path(SEARCH_FILE);
        write_json(&path, &outcome)?;
        artifacts.push(path);
        sub_seeds = vec!["folds", "search"];
    }
    let spec = spec_for(ctx, kind, &train);
    let model = spec.fit(&matrix, &labels).context(ctx_name)?;
    let path = ctx.path(MODEL_FILE);
    write_json(&path, &ModelFile::new(spec.clone(), model))?;
    artifacts.insert(0, path);
    Ok(Stage {
        inputs: vec![input.to_path_buf()],
        artifacts,
        config: serde_json::json!({
            "spec": to_value(&spec),
            "search": if search { Some(to_value(&ctx.config.search)) } else { None },
            "folds": cv.folds,
            "threshold": cv.threshold,
        }),
        sub_seeds,
    })
}

fn export<T: Serialize>(ctx: &Ctx, stem: &str, value: &T, csv: impl FnOnce(&Path) -> Result<()>) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if ctx.json() {
        let p = ctx.path(&format!("{stem}.json"));
        write_json(&p, value)?;
        out.push(p);
    }
    if ctx.csv() {
        let p = ctx.path(&format!("{stem}.csv"));
        csv(&p)?;
        out.push(p);
    }
    Ok(out)
}

fn eval_stage(ctx: &Ctx, input: &Path, model: Option<&Path>, kind: ModelKind, cv: &CvArgs) -> Result<Stage> {
    let (matrix, labels) = table::read_features(input)?;
    let spec = match model {
        Some(p) => ModelFile::load(p)?.spec,
        None => spec_for(ctx, kind, &ctx.config.train),
    };
    let report = kfold_cv(&matrix, &labels, &spec, &ctx.cv(cv), &ctx.exec)
        .context(|| input.display().to_string())?;
    let artifacts = export(ctx, "cv", &report, |p| formats::write_cv_csv(p, &report))?;
    let mut inputs = vec![input.to_path_buf()];
    inputs.extend(model.map(Path::to_path_buf));
    Ok(Stage {
        inputs,
        artifacts,
        config: serde_json::json!({ "spec": to_value(&spec), "folds": cv.folds, "threshold": cv.threshold }),
        sub_seeds: vec!["folds"],
    })
}

fn check_names(model: &[String], matrix: &FeatureMatrix, model_path: &Path, input: &Path) -> Result<()> {
    if model != matrix.names() {
        return Err(Error::Model(format!(
            "{}: model features do not match the columns of {}",
            model_path.display(),
            input.display()
        )));
    }
    Ok(())
}

fn explain_stage(ctx: &Ctx, input: &Path, model_path: &Path, interactions: bool) -> Result<Stage> {
    let (matrix, labels) = table::read_features(input)?;
    let file = ModelFile::load(model_path)?;
    let TrainedModel::Gbt(ensemble) = &file.model else {
        return Err(Error::Model(format!(
            "{}: explanations need a gbt model, found {}",
            model_path.display(),
            file.model.kind().name()
        )));
    };
    check_names(&ensemble.feature_names, &matrix, model_path, input)?;
    let model_ctx = || model_path.display().to_string();
    let explainer = TreeExplainer::new(ensemble, &ctx.config.explain).context(model_ctx)?;
    let rows = explain_rows(&explainer, &matrix, interactions, &ctx.exec).context(model_ctx)?;
    let base = base_value(ensemble, &matrix).context(model_ctx)?;
    let doc = ExplanationsFile::new(
        &matrix,
        Some(&labels),
        base,
        explainer.base(),
        ctx.config.explain.normalization,
        &rows,
    );
    let path = ctx.path(EXPLANATIONS_FILE);
    write_json(&path, &doc)?;
    let mut artifacts = vec![path];
    if ctx.csv() {
        let p = ctx.path("shap.csv");
        formats::write_shap_csv(&p, &doc)?;
        artifacts.push(p);
    }
    Ok(Stage {
        inputs: vec![input.to_path_buf(), model_path.to_path_buf()],
        artifacts,
        config: serde_json::json!({ "explain": to_value(&ctx.config.explain), "interactions": interactions }),
        sub_seeds: vec![],
    })
}

fn dependence_all(batch: &ExplanationBatch) -> boostlens_core::Result<Vec<boostlens_core::report::DependenceSeries>> {
    let ranking = feature_importance(batch);
    (0..batch.n_features())
        .map(|i| {
            let partner = if batch.phi2.is_some() || batch.n_features() < 2 {
                None
            } else {
                ranking.iter().map(|r| r.feature).find(|&f| f != i)
            };
            dependence_series(batch, i, partner.or(if batch.n_features() < 2 { Some(i) } else { None }))
        })
        .collect()
}

fn report_stage(ctx: &Ctx, input: &Path, run_id: &str, force_rows: &[usize]) -> Result<Stage> {
    let doc: ExplanationsFile = read_json(input)?;
    let batch = doc.to_batch(input)?;
    let ctx_name = || input.display().to_string();
    let name = |artifact: &str| format!("{run_id}.{artifact}");
    let mut artifacts = Vec::new();

    let importance = feature_importance(&batch);
    artifacts.extend(export(ctx, &name("importance"), &importance, |p| {
        formats::write_importance_csv(p, &importance)
    })?);
    let summary = summary_points(&batch);
    artifacts.extend(export(ctx, &name("summary"), &summary, |p| {
        formats::write_summary_csv(p, &summary)
    })?);
    let dependence = dependence_all(&batch).context(ctx_name)?;
    artifacts.extend(export(ctx, &name("dependence"), &dependence, |p| {
        formats::write_dependence_csv(p, &dependence)
    })?);
    if batch.phi2.is_some() {
        let effects = effect_sums(&batch).context(ctx_name)?;
        artifacts.extend(export(ctx, &name("effects"), &effects, |p| {
            formats::write_effects_csv(p, &effects)
        })?);
    }
    let correlations = shap_correlations(&batch);
    artifacts.extend(export(ctx, &name("correlations"), &correlations, |p| {
        formats::write_correlations_csv(p, &correlations)
    })?);
    let force = force_rows
        .iter()
        .map(|&r| force_data(&batch, r))
        .collect::<boostlens_core::Result<Vec<_>>>()
        .map_err(|e| Error::Usage(format!("--force-rows: {e}")))?;
    artifacts.extend(export(ctx, &name("force"), &force, |p| formats::write_force_csv(p, &force))?);
    Ok(Stage {
        inputs: vec![input.to_path_buf()],
        artifacts,
        config: serde_json::json!({ "run_id": run_id, "force_rows": force_rows }),
        sub_seeds: vec![],
    })
}

fn compare_stage(ctx: &Ctx, input: &Path, cv: &CvArgs) -> Result<Stage> {
    let (matrix, labels) = table::read_features(input)?;
    let models = vec![
        ModelSpec::Gbt(ctx.config.train.clone()),
        ModelSpec::Logistic(ctx.config.logistic.clone()),
        ModelSpec::Cart(ctx.config.train.clone()),
    ];
    let cmp = compare_models(&matrix, &labels, &models, &ctx.cv(cv), &ctx.exec)
        .context(|| input.display().to_string())?;
    let artifacts = export(ctx, "comparison", &cmp, |p| formats::write_comparison_csv(p, &cmp))?;
    Ok(Stage {
        inputs: vec![input.to_path_buf()],
        artifacts,
        config: serde_json::json!({ "models": to_value(&models), "folds": cv.folds, "threshold": cv.threshold }),
        sub_seeds: vec!["folds"],
    })
}

fn check_threshold(cv: &CvArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&cv.threshold) {
        return Err(Error::Usage(format!("--threshold {}: must lie in [0, 1]", cv.threshold)));
    }
    if cv.folds < 2 {
        return Err(Error::Usage(format!("--folds {}: must be at least 2", cv.folds)));
    }
    Ok(())
}

fn single(common: &Common, name: &str, run: impl FnOnce(&Ctx) -> Result<Stage>) -> Result<()> {
    let ctx = Ctx::new(common)?;
    let stage = run(&ctx)?;
    let mut manifest = Manifest::open(&ctx.out)?;
    record(&ctx, &mut manifest, name, stage)?;
    manifest.save(&ctx.out)?;
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    check_threshold(&args.cv)?;
    let ctx = Ctx::new(&args.common)?;
    let mut manifest = Manifest::default();
    let schema = args.schema.as_deref();
    let survey = match &args.input {
        Some(p) => p.clone(),
        None => {
            let s = synth_stage(&ctx, schema, args.synth_config.as_deref(), None)?;
            record(&ctx, &mut manifest, "synth", s)?;
            ctx.path(SURVEY_FILE)
        }
    };
    let s = clean_stage(&ctx, &survey, schema)?;
    record(&ctx, &mut manifest, "clean", s)?;
    let features = ctx.path(FEATURES_FILE);
    let s = train_stage(&ctx, &features, ModelKind::Gbt, args.search, &args.cv)?;
    record(&ctx, &mut manifest, "train", s)?;
    let model = ctx.path(MODEL_FILE);
    let s = eval_stage(&ctx, &features, Some(&model), ModelKind::Gbt, &args.cv)?;
    record(&ctx, &mut manifest, "eval", s)?;
    let s = explain_stage(&ctx, &features, &model, args.interactions)?;
    record(&ctx, &mut manifest, "explain", s)?;
    let s = report_stage(&ctx, &ctx.path(EXPLANATIONS_FILE), &args.run_id, &args.force_rows)?;
    record(&ctx, &mut manifest, "report", s)?;
    let s = compare_stage(&ctx, &features, &args.cv)?;
    record(&ctx, &mut manifest, "compare", s)?;
    manifest.save(&ctx.out)?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => single(&a.common, "synth", |ctx| {
            synth_stage(ctx, a.schema.as_deref(), a.synth_config.as_deref(), a.rows)
        }),
        Command::Clean(a) => single(&a.common, "clean", |ctx| clean_stage(ctx, &a.input, a.schema.as_deref())),
        Command::Train(a) => {
            check_threshold(&a.cv)?;
            single(&a.common, "train", |ctx| train_stage(ctx, &a.input, a.kind.into(), a.search, &a.cv))
        }
        Command::Eval(a) => {
            check_threshold(&a.cv)?;
            single(&a.common, "eval", |ctx| {
                eval_stage(ctx, &a.input, a.model.as_deref(), a.kind.into(), &a.cv)
            })
        }
        Command::Explain(a) => single(&a.common, "explain", |ctx| {
            explain_stage(ctx, &a.input, &a.model, a.interactions)
        }),
        Command::Report(a) => single(&a.common, "report", |ctx| {
            report_stage(ctx, &a.input, &a.run_id, &a.force_rows)
        }),
        Command::Compare(a) => {
            check_threshold(&a.cv)?;
            single(&a.common, "compare", |ctx| compare_stage(ctx, &a.input, &a.cv))
        }
        Command::Pipeline(a) => pipeline(a),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

