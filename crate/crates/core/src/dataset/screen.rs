use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{CellError, ColumnKind, SurveySchema};
use crate::error::{Error, Result};

/// One survey response as exported: raw cells in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    /// Zero-based position of the data row in its source.
    pub index: usize,
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_seconds: Option<f64>,
}

/// Why a record was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Row could not be read (field count, completion time).
    #[serde(rename = "P1")]
    Malformed,
    /// More years of driving than the age allows.
    #[serde(rename = "R1")]
    DrivingExceedsAge,
    /// Missing, non-numeric or out-of-range value.
    #[serde(rename = "R2")]
    InvalidValue,
    /// Identical answer to every 7-point item.
    #[serde(rename = "R3")]
    StraightLining,
    /// Completed faster than the minimum duration.
    #[serde(rename = "R4")]
    TooFast,
}

impl RuleId {
    pub fn code(self) -> &'static str {
        match self {
            RuleId::Malformed => "P1",
            RuleId::DrivingExceedsAge => "R1",
            RuleId::InvalidValue => "R2",
            RuleId::StraightLining => "R3",
            RuleId::TooFast => "R4",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub rule: RuleId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyDataset {
    pub schema: SurveySchema,
    pub records: Vec<SurveyRecord>,
    /// Sorted by record index, then rule.
    pub rejection_log: Vec<Rejection>,
}

impl SurveyDataset {
    pub fn new(
        schema: SurveySchema,
        records: Vec<SurveyRecord>,
        rejection_log: Vec<Rejection>,
    ) -> Result<Self> {
        schema.validate()?;
        for r in &records {
            if r.values.len() != schema.len() {
                return Err(Error::LengthMismatch {
                    what: "record values vs schema columns",
                    left: r.values.len(),
                    right: schema.len(),
                });
            }
        }
        let mut log = rejection_log;
        log.sort();
        log.dedup();
        if let Some(r) = records
            .iter()
            .find(|r| log.binary_search_by(|x| x.index.cmp(&r.index)).is_ok())
        {
            return Err(Error::InvalidConfig(format!(
                "record {} is both retained and rejected",
                r.index
            )));
        }
        Ok(Self {
            schema,
            records,
            rejection_log: log,
        })
    }

    /// Distinct rejected record indices, ascending.
    pub fn rejected_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.rejection_log.iter().map(|r| r.index).collect();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenConfig {
    pub min_completion_seconds: f64,
    /// Earliest age at which driving years can start accruing.
    pub min_driving_age: f64,
    pub age_column: String,
    pub years_column: String,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            min_completion_seconds: 60.0,
            min_driving_age: 14.0,
            age_column: String::from("Age"),
            years_column: String::from("YearsDriving"),
        }
    }
}

/// Every rule that fires on `record`, in rule order.
pub fn rules_fired(schema: &SurveySchema, record: &SurveyRecord, config: &ScreenConfig) -> Vec<RuleId> {
    let mut fired = Vec::new();
    let parsed: Vec<_> = schema
        .columns
        .iter()
        .zip(&record.values)
        .map(|(c, v)| c.parse(v))
        .collect();

    if let (Some(a), Some(y)) = (
        schema.index_of(&config.age_column),
        schema.index_of(&config.years_column),
    ) {
        if let (Ok(age), Ok(years)) = (parsed[a], parsed[y]) {
            if years > age - config.min_driving_age {
                fired.push(RuleId::DrivingExceedsAge);
            }
        }
    }

    // Unknown category levels are left for the encoder to report.
    let invalid = parsed.iter().any(|p| {
        matches!(
            p,
            Err(CellError::Missing | CellError::NotNumeric | CellError::OutOfRange)
        )
    });
    if invalid {
        fired.push(RuleId::InvalidValue);
    }

    let likert: Vec<_> = schema
        .columns
        .iter()
        .zip(&parsed)
        .filter(|(c, _)| c.kind == ColumnKind::Likert7)
        .map(|(_, p)| *p)
        .collect();
    if likert.len() >= 2 && likert.iter().all(|p| p.is_ok()) {
        let first = likert[0];
        if likert.iter().all(|p| *p == first) {
            fired.push(RuleId::StraightLining);
        }
    }

    if record
        .completion_seconds
        .is_some_and(|s| s < config.min_completion_seconds)
    {
        fired.push(RuleId::TooFast);
    }
    fired
}

/// Moves every record on which any rule fires into the rejection log.
///
/// Never fails; retained records keep their order and the log stays sorted
/// by original record index.
pub fn screen_invalid(dataset: &SurveyDataset, config: &ScreenConfig) -> SurveyDataset {
    let mut log = dataset.rejection_log.clone();
    let mut kept = Vec::with_capacity(dataset.records.len());
    for record in &dataset.records {
        let fired = rules_fired(&dataset.schema, record, config);
        if fired.is_empty() {
            kept.push(record.clone());
        } else {
            log.extend(fired.into_iter().map(|rule| Rejection {
                index: record.index,
                rule,
            }));
        }
    }
    log.sort();
    SurveyDataset {
        schema: dataset.schema.clone(),
        records: kept,
        rejection_log: log,
    }
}
