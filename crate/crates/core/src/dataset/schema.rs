use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optional trailing column with the respondent's completion time.
pub const COMPLETION_COLUMN: &str = "completion_seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryLevel {
    pub label: String,
    /// Numeric value used for this level after encoding.
    pub code: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Integer answer on a 1..=7 scale.
    Likert7,
    /// "Yes"/"No" (or 1/0).
    YesNo,
    /// Non-negative number, optionally bounded above.
    Count {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    /// Fixed code table; codes are declared, never inferred.
    Category { levels: Vec<CategoryLevel> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub response: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellError {
    Missing,
    NotNumeric,
    OutOfRange,
    UnknownLevel,
}

impl Column {
    fn new(name: &str, kind: ColumnKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            response: false,
        }
    }

    /// Typed value of a raw cell.
    pub fn parse(&self, raw: &str) -> core::result::Result<f64, CellError> {
        let s = raw.trim();
        if s.is_empty() {
            return Err(CellError::Missing);
        }
        match &self.kind {
            ColumnKind::Likert7 => {
                let v: f64 = s.parse().map_err(|_| CellError::NotNumeric)?;
                if !v.is_finite() {
                    return Err(CellError::NotNumeric);
                }
                if libm::trunc(v) != v || !(1.0..=7.0).contains(&v) {
                    return Err(CellError::OutOfRange);
                }
                Ok(v)
            }
            ColumnKind::YesNo => {
                if s.eq_ignore_ascii_case("yes") || s == "1" {
                    Ok(1.0)
                } else if s.eq_ignore_ascii_case("no") || s == "0" {
                    Ok(0.0)
                } else {
                    Err(CellError::NotNumeric)
                }
            }
            ColumnKind::Count { max } => {
                let v: f64 = s.parse().map_err(|_| CellError::NotNumeric)?;
                if !v.is_finite() {
                    return Err(CellError::NotNumeric);
                }
                if v < 0.0 || max.is_some_and(|m| v > m) {
                    return Err(CellError::OutOfRange);
                }
                Ok(v)
            }
            ColumnKind::Category { levels } => levels
                .iter()
                .find(|l| l.label == s)
                .map(|l| l.code)
                .ok_or(CellError::UnknownLevel),
        }
    }
}

/// Ordered survey columns with exactly one response column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySchema {
    pub columns: Vec<Column>,
}

/// Position of schema columns (and the optional completion time) in a file header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderLayout {
    pub schema_positions: Vec<usize>,
    pub completion: Option<usize>,
    pub width: usize,
}

impl SurveySchema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let schema = Self { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchema(m));
        for (i, c) in self.columns.iter().enumerate() {
            if c.name.trim().is_empty() {
                return bad(format!("column {i} has an empty name"));
            }
            if c.name == COMPLETION_COLUMN {
                return bad(format!("{COMPLETION_COLUMN} is reserved"));
            }
            if self.columns[..i].iter().any(|o| o.name == c.name) {
                return bad(format!("duplicate column {:?}", c.name));
            }
            match &c.kind {
                ColumnKind::Category { levels } => {
                    if levels.is_empty() {
                        return bad(format!("category column {:?} has no levels", c.name));
                    }
                    for (j, l) in levels.iter().enumerate() {
                        if !l.code.is_finite() {
                            return bad(format!("{:?}: non-finite code", c.name));
                        }
                        if levels[..j].iter().any(|o| o.label == l.label) {
                            return bad(format!("{:?}: duplicate level {:?}", c.name, l.label));
                        }
                    }
                }
                ColumnKind::Count { max: Some(m) } if !(*m >= 0.0) => {
                    return bad(format!("{:?}: count max must be >= 0", c.name));
                }
                _ => {}
            }
        }
        let responses: Vec<&Column> = self.columns.iter().filter(|c| c.response).collect();
        match responses.as_slice() {
            [r] if r.kind == ColumnKind::Likert7 => Ok(()),
            [r] => bad(format!("response column {:?} must be likert7", r.name)),
            [] => bad(String::from("no response column")),
            _ => bad(String::from("more than one response column")),
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn response_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.response)
            .expect("validated schema has a response column")
    }

    /// Indices of the predictor columns, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| !self.columns[i].response)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.columns[i].name.clone())
            .collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Matches a file header against the schema. Schema columns must appear
    /// in schema order; `completion_seconds` may appear once anywhere.
    pub fn match_header<S: AsRef<str>>(&self, header: &[S]) -> Result<HeaderLayout> {
        let header: Vec<&str> = header.iter().map(|s| s.as_ref().trim()).collect();
        for (i, h) in header.iter().enumerate() {
            if header[..i].contains(h) {
                return Err(Error::InvalidSchema(format!("duplicate header column {h:?}")));
            }
        }
        let completion = header.iter().position(|h| *h == COMPLETION_COLUMN);
        let rest: Vec<(usize, &str)> = header
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, h)| *h != COMPLETION_COLUMN)
            .collect();
        let names = self.names();
        let got: Vec<&str> = rest.iter().map(|(_, h)| *h).collect();
        if got != names {
            let missing: Vec<&str> = names.iter().copied().filter(|n| !got.contains(n)).collect();
            let extra: Vec<&str> = got.iter().copied().filter(|n| !names.contains(n)).collect();
            return Err(Error::InvalidSchema(format!(
                "header mismatch: missing {missing:?}, unexpected {extra:?}{}",
                if missing.is_empty() && extra.is_empty() {
                    ", wrong column order"
                } else {
                    ""
                }
            )));
        }
        Ok(HeaderLayout {
            schema_positions: rest.iter().map(|(i, _)| *i).collect(),
            completion,
            width: header.len(),
        })
    }

    /// The 24-column survey: 23 predictors and the 7-point trust response.
    ///
    /// Age is collected in buckets and encoded as the bucket midpoint; the
    /// open-ended buckets use 16 (under 18) and 70 (65 and over).
    pub fn table2() -> Self {
        use ColumnKind::*;
        let levels = |pairs: &[(&str, f64)]| Category {
            levels: pairs
                .iter()
                .map(|(l, c)| CategoryLevel {
                    label: l.to_string(),
                    code: *c,
                })
                .collect(),
        };
        let mut columns = vec![
            Column::new("Gender", levels(&[("Female", 0.0), ("Male", 1.0), ("Other", 2.0)])),
            Column::new(
                "Age",
                levels(&[
                    ("<18", 16.0),
                    ("18-24", 21.0),
                    ("25-34", 29.5),
                    ("35-44", 39.5),
                    ("45-54", 49.5),
                    ("55-64", 59.5),
                    (">=65", 70.0),
                ]),
            ),
            Column::new(
                "EducationLevel",
                levels(&[
                    ("High school degree or less", 0.0),
                    ("Some college", 1.0),
                    ("Associate degree", 2.0),
                    ("Bachelor's degree", 3.0),
                    ("Master's degree", 4.0),
                    ("Professional degree", 5.0),
                    ("Doctoral degree", 6.0),
                ]),
            ),
            Column::new("DrivingLicense", YesNo),
            Column::new("YearsDriving", Count { max: None }),
            Column::new("DrivingDaysPerWeek", Count { max: Some(7.0) }),
            Column::new("EagertoAdopt", Likert7),
            Column::new("KnowledgeinAVs", Likert7),
            Column::new("AVAccident", YesNo),
            Column::new("AssistTechExperience", Likert7),
            Column::new("BeeninAV", YesNo),
            Column::new("Risk", Likert7),
            Column::new("Benefit", Likert7),
            Column::new("Assess5inAV", YesNo),
            Column::new("Assess6to12inAV", YesNo),
            Column::new("Assess13to17inAV", YesNo),
            Column::new("Assess18inAV", YesNo),
            Column::new("Control", Likert7),
            Column::new("Excitement", Likert7),
            Column::new("Enjoyment", Likert7),
            Column::new("Stress", Likert7),
            Column::new("Fear", Likert7),
            Column::new("Nervousness", Likert7),
            Column::new("Trust", Likert7),
        ];
        columns.last_mut().expect("non-empty").response = true;
        Self { columns }
    }
}
