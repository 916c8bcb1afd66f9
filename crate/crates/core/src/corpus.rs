//! Paper-record ingestion: parse line-delimited records, enforce eligibility,
//! and index by year.
//!
//! Input is UTF-8, one JSON object per line: `id` (string), `year` (integer),
//! `terms` (array of strings), plus optional `venue`, `field`, `label` (0/1),
//! `citations`. Terms are NFC-normalized, whitespace-trimmed, and deduplicated
//! on parse; string comparison is exact after that (no case folding).

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Errors raised while parsing or validating records.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?} (first seen on line {first_line})")]
    DuplicateId {
        line: usize,
        id: String,
        first_line: usize,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One publication: identifier, year, and its set of knowledge-unit terms.
///
/// `terms` is deduplicated and kept in first-occurrence order so that
/// downstream matrices index terms deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub year: i32,
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Outcome label for evaluation corpora, serialized as 0/1.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "label_01")]
    pub label: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citations: Option<u64>,
}

mod label_01 {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_u8(u8::from(*b)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<bool>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Bool(bool),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Bool(b)) => Ok(Some(b)),
            Some(Raw::Int(0)) => Ok(Some(false)),
            Some(Raw::Int(1)) => Ok(Some(true)),
            Some(Raw::Int(other)) => Err(D::Error::custom(format!(
                "label must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl PaperRecord {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }
}

/// Year bounds applied at parse time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParseOptions {
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            min_year: 1000,
            max_year: 2999,
        }
    }
}

/// Canonical term form: NFC normalization plus surrounding-whitespace trim.
pub fn normalize_term(raw: &str) -> String {
    raw.trim().nfc().collect()
}

/// Parse one record per line, validating fields and corpus-wide id uniqueness.
///
/// Records come back in input order. Duplicate terms within a record are
/// silently dropped; an empty term after normalization is an error.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    opts: &ParseOptions,
) -> Result<Vec<PaperRecord>, CorpusError> {
    let mut out = Vec::new();
    let mut seen_ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let mut rec: PaperRecord =
            serde_json::from_str(&text).map_err(|source| CorpusError::Malformed {
                line: line_no,
                source,
            })?;
        validate_record(&mut rec, opts).map_err(|message| CorpusError::Invalid {
            line: line_no,
            message,
        })?;
        if let Some(&first_line) = seen_ids.get(&rec.id) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: rec.id,
                first_line,
            });
        }
        seen_ids.insert(rec.id.clone(), line_no);
        out.push(rec);
    }
    Ok(out)
}

/// [`parse_corpus`] over a file path.
pub fn parse_corpus_file(
    path: &Path,
    opts: &ParseOptions,
) -> Result<Vec<PaperRecord>, CorpusError> {
    let file = std::fs::File::open(path)?;
    parse_corpus(std::io::BufReader::new(file), opts)
}

fn validate_record(rec: &mut PaperRecord, opts: &ParseOptions) -> Result<(), String> {
    if rec.id.is_empty() {
        return Err("missing field: id must be non-empty".into());
    }
    if rec.year < opts.min_year || rec.year > opts.max_year {
        return Err(format!(
            "year {} outside [{}, {}]",
            rec.year, opts.min_year, opts.max_year
        ));
    }
    let mut seen = HashSet::new();
    let mut deduped = Vec::with_capacity(rec.terms.len());
    for raw in &rec.terms {
        let term = normalize_term(raw);
        if term.is_empty() {
            return Err(format!("record {:?} has an empty term", rec.id));
        }
        if seen.insert(term.clone()) {
            deduped.push(term);
        }
    }
    rec.terms = deduped;
    Ok(())
}

/// Serialize records back to the line-delimited input format.
pub fn write_corpus<W: Write>(mut w: W, records: &[PaperRecord]) -> Result<(), CorpusError> {
    for rec in records {
        serde_json::to_writer(&mut w, rec).map_err(|e| CorpusError::Io(e.into()))?;
        writeln!(w)?;
    }
    Ok(())
}

/// Counts of records removed by [`filter_eligible`], by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub kept: usize,
    pub removed_no_terms: usize,
    pub removed_single_term: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.removed_no_terms + self.removed_single_term
    }
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kept {} records; removed {} with no terms, {} with a single term",
            self.kept, self.removed_no_terms, self.removed_single_term
        )
    }
}

/// Tally what [`filter_eligible`] would remove, without consuming anything.
pub fn eligibility_report(records: &[PaperRecord]) -> FilterReport {
    let mut report = FilterReport::default();
    for r in records {
        match r.terms.len() {
            0 => report.removed_no_terms += 1,
            1 => report.removed_single_term += 1,
            _ => report.kept += 1,
        }
    }
    report
}

/// Keep only records with at least two terms; a pairwise measure is undefined
/// below that.
pub fn filter_eligible(records: Vec<PaperRecord>) -> (Vec<PaperRecord>, FilterReport) {
    let mut report = FilterReport::default();
    let kept: Vec<PaperRecord> = records
        .into_iter()
        .filter(|r| match r.terms.len() {
            0 => {
                report.removed_no_terms += 1;
                false
            }
            1 => {
                report.removed_single_term += 1;
                false
            }
            _ => true,
        })
        .collect();
    report.kept = kept.len();
    (kept, report)
}

/// Records bucketed by publication year, preserving input order within a year.
///
/// Immutable after construction and safe to share across scoring workers.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    records_by_year: std::collections::BTreeMap<i32, Vec<PaperRecord>>,
    total_count: usize,
}

impl CorpusIndex {
    /// Bucket records by year. Buckets are complete and disjoint because each
    /// record carries exactly one year.
    pub fn build(records: Vec<PaperRecord>) -> Self {
        let mut records_by_year: std::collections::BTreeMap<i32, Vec<PaperRecord>> =
            std::collections::BTreeMap::new();
        let total_count = records.len();
        for rec in records {
            records_by_year.entry(rec.year).or_default().push(rec);
        }
        CorpusIndex {
            records_by_year,
            total_count,
        }
    }

    pub fn total_count(&self) -> usize {
        self.total_count
    }

    pub fn is_empty(&self) -> bool {
        self.total_count == 0
    }

    /// Years with at least one record, ascending.
    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.records_by_year.keys().copied()
    }

    pub fn records_in_year(&self, year: i32) -> &[PaperRecord] {
        self.records_by_year
            .get(&year)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All records of years in `[start, end]`, ascending year then input order.
    pub fn records_in_range(&self, start: i32, end: i32) -> impl Iterator<Item = &PaperRecord> {
        self.records_by_year
            .range(start..=end)
            .flat_map(|(_, v)| v.iter())
    }

    /// All records in (year, input) order.
    pub fn records(&self) -> impl Iterator<Item = &PaperRecord> {
        self.records_by_year.values().flat_map(|v| v.iter())
    }
}
