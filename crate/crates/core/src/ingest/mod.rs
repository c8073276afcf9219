//! Step-activity log ingestion.
//!
//! A step-activity export has one row per `(learner, resource)` pair with the
//! first time the learner opened the resource and the last time they marked
//! it complete. Rows are validated individually: a bad row is reported as a
//! [`RowError`] and skipped, while a header without the required columns
//! fails the whole stream.

mod curriculum;
mod resource;

use std::io::{Read, Write};
use std::ops::Range;

pub use curriculum::{derive_curriculum, load_curriculum, Curriculum, ResourceType};
pub use resource::{format_timestamp, parse_timestamp, ParseResourceError, ResourceId};

use crate::error::{Error, Result};

pub const LEARNER_COLUMN: &str = "learner_id";
pub const RESOURCE_COLUMN: &str = "resource";
pub const RESOURCE_ALIAS: &str = "step";
pub const FIRST_VISIT_COLUMN: &str = "first_visited_at";
pub const COMPLETION_COLUMN: &str = "last_completed_at";

/// One learner's interaction with one resource, timestamps in epoch seconds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepActivityRecord {
    pub learner_id: String,
    pub resource: ResourceId,
    pub first_visited_at: i64,
    pub last_completed_at: Option<i64>,
}

impl StepActivityRecord {
    /// Seconds between first visit and completion; zero when never completed.
    pub fn duration(&self) -> i64 {
        self.last_completed_at
            .map_or(0, |done| done - self.first_visited_at)
    }
}

/// A rejected input row. `line` is 1-based and counts the header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// A validated event log: at most one record per `(learner, resource)`,
/// stored sorted by learner id and then resource.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    records: Vec<StepActivityRecord>,
    learners: Vec<Range<usize>>,
}

impl EventLog {
    /// Normalizes raw records: sorts them and merges duplicates (earliest
    /// first visit, latest completion).
    pub fn from_records(mut records: Vec<StepActivityRecord>) -> Self {
        records.sort_unstable_by(|a, b| {
            (&a.learner_id, a.resource, a.first_visited_at, a.last_completed_at).cmp(&(
                &b.learner_id,
                b.resource,
                b.first_visited_at,
                b.last_completed_at,
            ))
        });
        let mut merged: Vec<StepActivityRecord> = Vec::with_capacity(records.len());
        for rec in records {
            match merged.last_mut() {
                Some(last) if last.learner_id == rec.learner_id && last.resource == rec.resource => {
                    // Sorted, so `last` already holds the earliest first visit.
                    last.last_completed_at = last.last_completed_at.max(rec.last_completed_at);
                }
                _ => merged.push(rec),
            }
        }

        let mut learners = Vec::new();
        let mut start = 0;
        for i in 1..=merged.len() {
            if i == merged.len() || merged[i].learner_id != merged[start].learner_id {
                learners.push(start..i);
                start = i;
            }
        }
        EventLog {
            records: merged,
            learners,
        }
    }

    pub fn records(&self) -> &[StepActivityRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn learner_count(&self) -> usize {
        self.learners.len()
    }

    /// Learners in id order, each with their records sorted by resource.
    pub fn learners(&self) -> impl ExactSizeIterator<Item = (&str, &[StepActivityRecord])> + '_ {
        self.learners.iter().map(move |range| {
            let recs = &self.records[range.clone()];
            (recs[0].learner_id.as_str(), recs)
        })
    }

    pub fn learner(&self, learner_id: &str) -> Option<&[StepActivityRecord]> {
        let pos = self
            .learners
            .binary_search_by(|range| self.records[range.start].learner_id.as_str().cmp(learner_id))
            .ok()?;
        Some(&self.records[self.learners[pos].clone()])
    }

    /// Writes the log in the export format; re-parsing yields an equal log.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record([LEARNER_COLUMN, RESOURCE_COLUMN, FIRST_VISIT_COLUMN, COMPLETION_COLUMN])?;
        for rec in &self.records {
            let completion = rec.last_completed_at.map(format_timestamp).unwrap_or_default();
            out.write_record([
                rec.learner_id.as_str(),
                &rec.resource.to_string(),
                &format_timestamp(rec.first_visited_at),
                &completion,
            ])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

struct Columns {
    learner: usize,
    resource: usize,
    first: usize,
    completion: usize,
}

impl Columns {
    fn locate(header: &csv::StringRecord) -> Result<Self> {
        let find = |names: &[&str]| header.iter().position(|h| names.contains(&h.trim()));
        let learner = find(&[LEARNER_COLUMN]);
        let resource = find(&[RESOURCE_COLUMN]).or_else(|| find(&[RESOURCE_ALIAS]));
        let first = find(&[FIRST_VISIT_COLUMN]);
        let completion = find(&[COMPLETION_COLUMN]);
        match (learner, resource, first, completion) {
            (Some(learner), Some(resource), Some(first), Some(completion)) => Ok(Columns {
                learner,
                resource,
                first,
                completion,
            }),
            _ => {
                let missing = [
                    (learner, LEARNER_COLUMN),
                    (resource, RESOURCE_COLUMN),
                    (first, FIRST_VISIT_COLUMN),
                    (completion, COMPLETION_COLUMN),
                ]
                .into_iter()
                .filter(|(pos, _)| pos.is_none())
                .map(|(_, name)| name.to_string())
                .collect();
                Err(Error::MissingColumns(missing))
            }
        }
    }

    fn record(&self, row: &csv::StringRecord) -> Result<StepActivityRecord, String> {
        let field = |idx: usize, name: &str| {
            row.get(idx)
                .map(str::trim)
                .ok_or_else(|| format!("missing field {name}"))
        };
        let learner_id = field(self.learner, LEARNER_COLUMN)?;
        if learner_id.is_empty() {
            return Err("empty learner_id".into());
        }
        let resource: ResourceId = field(self.resource, RESOURCE_COLUMN)?
            .parse()
            .map_err(|e: ParseResourceError| e.to_string())?;
        let first_raw = field(self.first, FIRST_VISIT_COLUMN)?;
        let first_visited_at = parse_timestamp(first_raw)
            .ok_or_else(|| format!("bad {FIRST_VISIT_COLUMN} timestamp {first_raw:?}"))?;
        // Older exports omit trailing empty cells entirely.
        let completion_raw = row.get(self.completion).map_or("", str::trim);
        let last_completed_at = if completion_raw.is_empty() {
            None
        } else {
            let t = parse_timestamp(completion_raw)
                .ok_or_else(|| format!("bad {COMPLETION_COLUMN} timestamp {completion_raw:?}"))?;
            if t < first_visited_at {
                return Err(format!("{COMPLETION_COLUMN} precedes {FIRST_VISIT_COLUMN}"));
            }
            Some(t)
        };
        Ok(StepActivityRecord {
            learner_id: learner_id.to_string(),
            resource,
            first_visited_at,
            last_completed_at,
        })
    }
}

/// Parses a step-activity CSV stream.
///
/// Returns the validated log together with every rejected row. Only a
/// missing header column or an I/O failure aborts the parse.
pub fn parse_step_activity<R: Read>(input: R) -> Result<(EventLog, Vec<RowError>)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(input);
    let columns = Columns::locate(reader.headers()?)?;

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                let line = row.position().map_or(0, |p| p.line());
                match columns.record(&row) {
                    Ok(rec) => records.push(rec),
                    Err(reason) => errors.push(RowError { line, reason }),
                }
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Utf8 { pos, .. } => errors.push(RowError {
                    line: pos.as_ref().map_or(0, |p| p.line()),
                    reason: "invalid UTF-8".into(),
                }),
                _ => return Err(e.into()),
            },
        }
    }
    Ok((EventLog::from_records(records), errors))
}
