//! CSV ingestion, cleaning, deduplication, stratified splitting, feature
//! tables and standardization.

mod features;
mod scaler;
mod stratify;

pub use features::{feature_row, natives_for, FeatureTable};
pub use scaler::Scaler;
pub use stratify::{
    categorize, compute_thresholds, percentile, split, Category, LengthThresholds, Split,
    SplitRatios, StratifiedDataset, ThresholdPolicy,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::DescriptorError;
use crate::hash::fnv1a;
use crate::smiles::{parse_smiles, smiles_length};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column '{0}'")]
    MissingColumn(&'static str),
    #[error("duplicate column '{0}'")]
    DuplicateColumn(String),
    #[error("no usable records after cleaning")]
    Empty,
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("invalid split ratios '{0}' (need three positive values summing to 1)")]
    InvalidRatios(String),
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in feature column {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}

/// How external columns with missing cells are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop any external column with a missing cell.
    #[default]
    Reject,
    /// Keep the column; missing cells take the training mean.
    MeanImpute,
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject" => Ok(MissingPolicy::Reject),
            "mean_impute" | "mean-impute" | "impute" => Ok(MissingPolicy::MeanImpute),
            _ => Err(format!("missing policy must be 'reject' or 'mean_impute', got '{s}'")),
        }
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::Reject => "reject",
            MissingPolicy::MeanImpute => "mean_impute",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub smiles: String,
    pub logd: f64,
    /// Zero-based data-row position in the source file.
    pub row: usize,
    pub date: Option<NaiveDateTime>,
    /// External descriptor values present for this record.
    pub external: BTreeMap<String, f64>,
}

impl Record {
    pub fn smiles_length(&self) -> usize {
        smiles_length(&self.smiles)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportAction {
    Dropped,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    /// Zero-based data row, or `None` for file-level notes.
    pub row: Option<usize>,
    pub id: String,
    pub action: ReportAction,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleaningReport {
    pub entries: Vec<ReportEntry>,
}

impl CleaningReport {
    fn push(&mut self, row: Option<usize>, id: &str, action: ReportAction, reason: String) {
        log::debug!("row {row:?} ({id}): {reason}");
        self.entries.push(ReportEntry {
            row,
            id: id.to_string(),
            action,
            reason,
        });
    }

    pub fn dropped(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.action == ReportAction::Dropped)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "id", "action", "reason"])?;
        for e in &self.entries {
            let row = e.row.map(|r| r.to_string()).unwrap_or_default();
            let action = match e.action {
                ReportAction::Dropped => "dropped",
                ReportAction::Warning => "warning",
            };
            w.write_record([row.as_str(), &e.id, action, &e.reason])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanedDataset {
    pub records: Vec<Record>,
    /// Numeric external columns in header order.
    pub external_columns: Vec<String>,
    pub report: CleaningReport,
    /// FNV-1a hash of the raw input bytes.
    pub fingerprint: u64,
}

impl CleanedDataset {
    pub fn lengths(&self) -> Vec<usize> {
        self.records.iter().map(Record::smiles_length).collect()
    }

    /// External columns usable under `policy`, in header order.
    ///
    /// With `Reject`, columns missing a value in any record are left out and
    /// listed in the second element.
    pub fn resolve_externals(&self, policy: MissingPolicy) -> (Vec<String>, Vec<String>) {
        match policy {
            MissingPolicy::MeanImpute => (self.external_columns.clone(), Vec::new()),
            MissingPolicy::Reject => self
                .external_columns
                .iter()
                .cloned()
                .partition(|c| self.records.iter().all(|r| r.external.contains_key(c))),
        }
    }

    /// Writes `id,category,split` for every record.
    pub fn write_splits<W: Write>(
        &self,
        strat: &StratifiedDataset,
        out: W,
    ) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "category", "split"])?;
        for (i, r) in self.records.iter().enumerate() {
            w.write_record([
                r.id.as_str(),
                strat.categories[i].as_str(),
                strat.splits[i].as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_and_clean(path: &Path) -> Result<CleanedDataset, DatasetError> {
    let bytes = std::fs::read(path)?;
    clean_csv(&bytes)
}

enum Cell {
    Missing,
    Value(f64),
    Invalid,
}

fn parse_cell(s: &str) -> Cell {
    let t = s.trim();
    if t.is_empty() || ["na", "nan", "null", "none"].contains(&t.to_ascii_lowercase().as_str()) {
        return Cell::Missing;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        _ => Cell::Invalid,
    }
}

/// Parses ISO-8601 dates: full timestamps, `YYYY-MM-DD`, `YYYY-MM` or `YYYY`.
pub fn parse_date(s: &str) -> Option<NaiveDateTime> {
    let t = s.trim();
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(t) {
        return Some(dt.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(dt);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(t, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    let parts: Vec<&str> = t.split('-').collect();
    let (y, m) = match parts.as_slice() {
        [y] if y.len() == 4 => (y.parse().ok()?, 1),
        [y, m] if y.len() == 4 => (y.parse().ok()?, m.parse().ok()?),
        _ => return None,
    };
    NaiveDate::from_ymd_opt(y, m, 1)?.and_hms_opt(0, 0, 0)
}

/// Validates, parses and deduplicates a peptide CSV held in memory.
pub fn clean_csv(bytes: &[u8]) -> Result<CleanedDataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .trim(csv::Trim::Headers)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let mut report = CleaningReport::default();

    let mut seen = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if seen.insert(h.to_ascii_lowercase(), i).is_some() {
            return Err(DatasetError::DuplicateColumn(h.to_string()));
        }
    }
    let find = |name: &'static str| seen.get(name).copied();
    let id_col = find("id").ok_or(DatasetError::MissingColumn("id"))?;
    let smiles_col = find("smiles").ok_or(DatasetError::MissingColumn("smiles"))?;
    let logd_col = find("logd").ok_or(DatasetError::MissingColumn("logd"))?;
    let date_col = find("date");
    let reserved = [Some(id_col), Some(smiles_col), Some(logd_col), date_col];

    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;

    // A column counts as numeric when more of its non-missing cells parse than fail.
    let mut external_columns = Vec::new();
    let mut external_idx = Vec::new();
    for (c, name) in headers.iter().enumerate() {
        if reserved.contains(&Some(c)) {
            continue;
        }
        let (mut ok, mut bad) = (0usize, 0usize);
        for r in &rows {
            match parse_cell(r.get(c).unwrap_or("")) {
                Cell::Value(_) => ok += 1,
                Cell::Invalid => bad += 1,
                Cell::Missing => {}
            }
        }
        if ok > bad {
            external_columns.push(name.to_string());
            external_idx.push(c);
        } else {
            report.push(
                None,
                "",
                ReportAction::Warning,
                format!("column '{name}' is not numeric; ignored"),
            );
        }
    }

    let mut candidates: Vec<Record> = Vec::new();
    'rows: for (row, r) in rows.iter().enumerate() {
        let id = r.get(id_col).unwrap_or("").trim().to_string();
        let smiles = r.get(smiles_col).unwrap_or("").trim().to_string();
        let mut drop = |reason: String| report.push(Some(row), &id, ReportAction::Dropped, reason);

        let graph = match parse_smiles(&smiles) {
            Ok(g) => g,
            Err(e) => {
                drop(format!("invalid SMILES: {e}"));
                continue;
            }
        };
        let logd = match parse_cell(r.get(logd_col).unwrap_or("")) {
            Cell::Value(v) => v,
            _ => {
                drop("logd missing or not a finite number".to_string());
                continue;
            }
        };
        let date = match date_col.map(|c| r.get(c).unwrap_or("").trim()) {
            None | Some("") => None,
            Some(text) => match parse_date(text) {
                Some(d) => Some(d),
                None => {
                    drop(format!("unparseable date '{text}'"));
                    continue;
                }
            },
        };
        let mut external = BTreeMap::new();
        for (name, &c) in external_columns.iter().zip(&external_idx) {
            match parse_cell(r.get(c).unwrap_or("")) {
                Cell::Value(v) => {
                    external.insert(name.clone(), v);
                }
                Cell::Missing => {}
                Cell::Invalid => {
                    drop(format!(
                        "non-numeric value '{}' in column '{name}'",
                        r.get(c).unwrap_or("").trim()
                    ));
                    continue 'rows;
                }
            }
        }
        for w in &graph.report.warnings {
            report.push(Some(row), &id, ReportAction::Warning, w.clone());
        }
        candidates.push(Record {
            id,
            smiles,
            logd,
            row,
            date,
            external,
        });
    }

    // Most recent measurement wins: latest date, then latest file position.
    let mut best: HashMap<&str, usize> = HashMap::new();
    for (i, rec) in candidates.iter().enumerate() {
        best.entry(rec.smiles.as_str())
            .and_modify(|b| {
                let cur = &candidates[*b];
                if (rec.date, rec.row) > (cur.date, cur.row) {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let keep: Vec<bool> = (0..candidates.len())
        .map(|i| best[candidates[i].smiles.as_str()] == i)
        .collect();
    let mut records = Vec::with_capacity(best.len());
    for (rec, k) in candidates.into_iter().zip(keep) {
        if k {
            records.push(rec);
        } else {
            report.push(
                Some(rec.row),
                &rec.id,
                ReportAction::Dropped,
                "duplicate SMILES superseded by a more recent measurement".to_string(),
            );
        }
    }
    report.entries.sort_by_key(|e| e.row.map_or(0, |r| r + 1));

    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(CleanedDataset {
        records,
        external_columns,
        report,
        fingerprint: fnv1a(bytes),
    })
}
