//! Survey ingestion: schema, screening, correlation pruning, label
//! binarization, numeric encoding and a seeded synthetic generator.

mod encode;
mod matrix;
mod prune;
mod schema;
mod screen;
mod synth;

pub use encode::{binarize_trust, encode_features, TrustClass};
pub(crate) use matrix::check_aligned;
pub use matrix::{FeatureMatrix, LabelVector};
pub use prune::{prune_correlated, DropReason, DroppedColumn, PruneOutcome, DEFAULT_CORRELATION_THRESHOLD};
pub use schema::{
    CategoryLevel, CellError, Column, ColumnKind, HeaderLayout, SurveySchema, COMPLETION_COLUMN,
};
pub use screen::{
    rules_fired, screen_invalid, Rejection, RuleId, ScreenConfig, SurveyDataset, SurveyRecord,
};
pub use synth::{
    synthesize, CountCap, Marginal, PairTerm, PlantedLogit, PlantedPair, SecondsRange, SynthConfig,
    Term,
};

pub use crate::math::pearson as pearson_correlation;
