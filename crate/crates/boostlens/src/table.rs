//! CSV readers and writers for survey exports and encoded feature tables.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use boostlens_core::dataset::{
    FeatureMatrix, LabelVector, Rejection, RuleId, SurveyDataset, SurveyRecord, SurveySchema,
    COMPLETION_COLUMN,
};

use crate::error::{Context, Error, Result};

/// Column holding the binary label in an encoded feature table.
pub const LABEL_COLUMN: &str = "label";

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads a survey export. The header must match `schema`; rows that cannot
/// be read (wrong field count, bad completion time, bad encoding) are logged
/// under rule P1 rather than dropped.
pub fn load_csv(path: &Path, schema: &SurveySchema) -> Result<SurveyDataset> {
    read_survey(open(path)?, path, schema)
}

pub fn read_survey<R: Read>(reader: R, path: &Path, schema: &SurveySchema) -> Result<SurveyDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::format(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let layout = schema
        .match_header(&header)
        .context(|| path.display().to_string())?;
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (index, row) in rdr.records().enumerate() {
        let parsed = row.ok().and_then(|row| {
            if row.len() != layout.width {
                return None;
            }
            let completion_seconds = match layout.completion.map(|c| row[c].trim()) {
                None | Some("") => None,
                Some(s) => match s.parse::<f64>() {
                    Ok(v) if v.is_finite() && v >= 0.0 => Some(v),
                    _ => return None,
                },
            };
            Some(SurveyRecord {
                index,
                values: layout
                    .schema_positions
                    .iter()
                    .map(|&p| row[p].to_owned())
                    .collect(),
                completion_seconds,
            })
        });
        match parsed {
            Some(r) => records.push(r),
            None => rejections.push(Rejection {
                index,
                rule: RuleId::Malformed,
            }),
        }
    }
    SurveyDataset::new(schema.clone(), records, rejections).context(|| path.display().to_string())
}

/// Writes retained records in schema order; a `completion_seconds` column
/// is appended when any record carries one.
pub fn write_survey(path: &Path, dataset: &SurveyDataset) -> Result<()> {
    let mut out = create(path)?;
    let with_time = dataset.records.iter().any(|r| r.completion_seconds.is_some());
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header: Vec<&str> = dataset.schema.names();
        if with_time {
            header.push(COMPLETION_COLUMN);
        }
        w.write_record(&header).map_err(|e| Error::format(path, e))?;
        for r in &dataset.records {
            let mut row: Vec<String> = r.values.clone();
            if with_time {
                row.push(r.completion_seconds.map(|s| s.to_string()).unwrap_or_default());
            }
            w.write_record(&row).map_err(|e| Error::format(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes the encoded matrix with a trailing 0/1 `label` column.
pub fn write_features(path: &Path, matrix: &FeatureMatrix, labels: &LabelVector) -> Result<()> {
    let mut out = create(path)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header: Vec<&str> = matrix.names().iter().map(String::as_str).collect();
        header.push(LABEL_COLUMN);
        w.write_record(&header).map_err(|e| Error::format(path, e))?;
        for (i, row) in matrix.rows().enumerate() {
            let mut cells: Vec<String> = row.iter().map(f64::to_string).collect();
            cells.push(u8::from(labels.get(i)).to_string());
            w.write_record(&cells).map_err(|e| Error::format(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features(path: &Path) -> Result<(FeatureMatrix, LabelVector)> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::format(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.last().map(String::as_str) != Some(LABEL_COLUMN) {
        return Err(Error::format(path, "last column must be `label`"));
    }
    let names = header[..header.len() - 1].to_vec();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::format(path, e))?;
        if row.len() != header.len() {
            return Err(Error::format(path, format!("row {i}: expected {} fields", header.len())));
        }
        for (c, cell) in row.iter().take(names.len()).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::format(path, format!("row {i}, column {}: {cell:?} is not a number", names[c])))?;
            values.push(v);
        }
        labels.push(match row[names.len()].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::format(path, format!("row {i}: label {other:?} is not 0 or 1"))),
        });
    }
    let rows = labels.len();
    let matrix = FeatureMatrix::from_flat(names, rows, values).context(|| path.display().to_string())?;
    Ok((matrix, LabelVector::new(labels)))
}

/// Writes any list of string rows under `header`.
pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = create(path)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).map_err(|e| Error::format(path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| Error::format(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
