//! Comment-file parsing, keyword pre-filtering, calendar bucketing and the
//! per-month statistics subsample.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Read};

use chrono::{DateTime, TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::tokenize::default_tokenize;
use crate::types::{month_stream, CommentRecord, MonthKey};

/// Wire format of a comment file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "jsonl" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown input format `{other}` (expected jsonl or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimestampFormat {
    #[default]
    Rfc3339,
    EpochSeconds,
}

/// Column/field names for the comment inputs.
///
/// `id`, `timestamp` and `text` are required; the rest are used when present.
/// If no token column exists in the data, tokens come from the default
/// tokenizer.
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub id: String,
    pub timestamp: String,
    pub text: String,
    pub tokens: String,
    pub label: String,
    pub prob: String,
    pub timestamp_format: TimestampFormat,
}

impl Default for FieldMap {
    fn default() -> Self {
        Self {
            id: "id".into(),
            timestamp: "ts".into(),
            text: "text".into(),
            tokens: "tokens".into(),
            label: "label".into(),
            prob: "prob".into(),
            timestamp_format: TimestampFormat::Rfc3339,
        }
    }
}

/// Result of parsing one comment file. Bad rows are skipped, counted, and
/// the first of their messages kept for reporting.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<CommentRecord>,
    pub skipped: usize,
    pub row_errors: Vec<String>,
}

const MAX_KEPT_ERRORS: usize = 100;

impl ParseOutcome {
    fn reject(&mut self, msg: String) {
        log::warn!("{msg}");
        self.skipped += 1;
        if self.row_errors.len() < MAX_KEPT_ERRORS {
            self.row_errors.push(msg);
        }
    }
}

/// Parse a comment stream into records.
///
/// Rows with unparseable timestamps, missing required fields, out-of-range
/// probabilities or duplicate ids are reported and skipped. A CSV header
/// missing a required column is fatal.
pub fn parse_comments<R: Read>(
    reader: R,
    format: InputFormat,
    map: &FieldMap,
) -> Result<ParseOutcome> {
    match format {
        InputFormat::Jsonl => parse_jsonl(reader, map),
        InputFormat::Csv => parse_csv(reader, map),
    }
}

fn parse_timestamp(raw: &str, format: TimestampFormat) -> Option<DateTime<Utc>> {
    match format {
        TimestampFormat::Rfc3339 => DateTime::parse_from_rfc3339(raw)
            .ok()
            .map(|dt| dt.with_timezone(&Utc)),
        TimestampFormat::EpochSeconds => raw
            .parse::<i64>()
            .ok()
            .and_then(|secs| Utc.timestamp_opt(secs, 0).single()),
    }
}

fn parse_jsonl<R: Read>(reader: R, map: &FieldMap) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = lineno + 1;
        let value: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                out.reject(format!("line {row}: invalid JSON: {e}"));
                continue;
            }
        };

        let id = match value.get(&map.id).and_then(Value::as_str) {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => {
                out.reject(format!("line {row}: missing or empty `{}` field", map.id));
                continue;
            }
        };

        let ts_raw = match value.get(&map.timestamp) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => {
                out.reject(format!("line {row}: missing `{}` field", map.timestamp));
                continue;
            }
        };
        let timestamp = match parse_timestamp(&ts_raw, map.timestamp_format) {
            Some(ts) => ts,
            None => {
                out.reject(format!("line {row}: unparseable timestamp `{ts_raw}`"));
                continue;
            }
        };

        let text = match value.get(&map.text).and_then(Value::as_str) {
            Some(s) => s.to_string(),
            None => {
                out.reject(format!("line {row}: missing `{}` field", map.text));
                continue;
            }
        };

        let tokens = match value.get(&map.tokens) {
            Some(Value::Array(items)) => {
                match items
                    .iter()
                    .map(|t| t.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                {
                    Some(tokens) => tokens,
                    None => {
                        out.reject(format!("line {row}: `{}` is not a string array", map.tokens));
                        continue;
                    }
                }
            }
            _ => default_tokenize(&text),
        };

        let label = match value.get(&map.label).and_then(Value::as_str) {
            Some(raw) => match raw.parse() {
                Ok(label) => Some(label),
                Err(_) => {
                    out.reject(format!("line {row}: unknown label `{raw}`"));
                    continue;
                }
            },
            None => None,
        };

        let predicted_prob = match value.get(&map.prob).and_then(Value::as_f64) {
            Some(p) if (0.0..=1.0).contains(&p) => Some(p),
            Some(p) => {
                out.reject(format!("line {row}: probability {p} outside [0, 1]"));
                continue;
            }
            None => None,
        };

        if !seen_ids.insert(id.clone()) {
            out.reject(format!("line {row}: duplicate id `{id}`"));
            continue;
        }

        out.records.push(CommentRecord {
            id,
            timestamp,
            text,
            tokens,
            label,
            predicted_prob,
            annotations: None,
        });
    }
    Ok(out)
}

fn parse_csv<R: Read>(reader: R, map: &FieldMap) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let id_col = col(&map.id).ok_or_else(|| Error::MissingColumn(map.id.clone()))?;
    let ts_col = col(&map.timestamp).ok_or_else(|| Error::MissingColumn(map.timestamp.clone()))?;
    let text_col = col(&map.text).ok_or_else(|| Error::MissingColumn(map.text.clone()))?;
    let tokens_col = col(&map.tokens);
    let label_col = col(&map.label);
    let prob_col = col(&map.prob);

    let mut out = ParseOutcome::default();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (i, record) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                out.reject(format!("row {row}: {e}"));
                continue;
            }
        };
        let field = |idx: usize| record.get(idx).unwrap_or("");

        let id = field(id_col).to_string();
        if id.is_empty() {
            out.reject(format!("row {row}: empty `{}` column", map.id));
            continue;
        }

        let ts_raw = field(ts_col);
        let timestamp = match parse_timestamp(ts_raw, map.timestamp_format) {
            Some(ts) => ts,
            None => {
                out.reject(format!("row {row}: unparseable timestamp `{ts_raw}`"));
                continue;
            }
        };

        let text = field(text_col).to_string();

        // Token cells are space-separated; an absent column falls back to the
        // default tokenizer.
        let tokens = match tokens_col {
            Some(idx) if !field(idx).is_empty() => {
                field(idx).split_whitespace().map(str::to_string).collect()
            }
            Some(_) => Vec::new(),
            None => default_tokenize(&text),
        };

        let label = match label_col.map(field).filter(|s| !s.is_empty()) {
            Some(raw) => match raw.parse() {
                Ok(label) => Some(label),
                Err(_) => {
                    out.reject(format!("row {row}: unknown label `{raw}`"));
                    continue;
                }
            },
            None => None,
        };

        let predicted_prob = match prob_col.map(field).filter(|s| !s.is_empty()) {
            Some(raw) => match raw.parse::<f64>() {
                Ok(p) if (0.0..=1.0).contains(&p) => Some(p),
                Ok(p) => {
                    out.reject(format!("row {row}: probability {p} outside [0, 1]"));
                    continue;
                }
                Err(_) => {
                    out.reject(format!("row {row}: unparseable probability `{raw}`"));
                    continue;
                }
            },
            None => None,
        };

        if !seen_ids.insert(id.clone()) {
            out.reject(format!("row {row}: duplicate id `{id}`"));
            continue;
        }

        out.records.push(CommentRecord {
            id,
            timestamp,
            text,
            tokens,
            label,
            predicted_prob,
            annotations: None,
        });
    }
    Ok(out)
}

/// Write comments in the JSONL shape [`parse_comments`] consumes with the
/// default field map. Optional fields are emitted only when present.
pub fn write_jsonl<W: std::io::Write>(comments: &[CommentRecord], mut writer: W) -> Result<()> {
    for comment in comments {
        let mut row = serde_json::json!({
            "id": comment.id,
            "ts": comment.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "text": comment.text,
            "tokens": comment.tokens,
        });
        if let Some(label) = comment.label {
            row["label"] = serde_json::Value::String(label.short_name().to_string());
        }
        if let Some(prob) = comment.predicted_prob {
            row["prob"] = serde_json::json!(prob);
        }
        serde_json::to_writer(&mut writer, &row)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Lowercase keyword set for the pre-filter.
#[derive(Debug, Clone)]
pub struct KeywordList {
    keywords: Vec<String>,
}

impl KeywordList {
    /// Build from raw words; entries are lowercased, deduplicated, and blank
    /// entries dropped. Errors if nothing remains.
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut keywords: Vec<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        keywords.sort();
        keywords.dedup();
        if keywords.is_empty() {
            return Err(Error::InvalidInput("keyword list is empty".into()));
        }
        Ok(Self { keywords })
    }

    /// Read a keyword file: one keyword per line, `#` starts a comment.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        for line in BufReader::new(reader).lines() {
            let line = line?;
            let entry = line.split('#').next().unwrap_or("").trim();
            if !entry.is_empty() {
                words.push(entry.to_string());
            }
        }
        Self::new(words)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    /// Does any token of the comment hit the list under the given mode?
    pub fn matches(&self, tokens: &[String], mode: MatchMode) -> bool {
        tokens.iter().any(|tok| {
            self.keywords.iter().any(|kw| match mode {
                MatchMode::Prefix => tok.starts_with(kw.as_str()),
                MatchMode::Exact => tok == kw,
            })
        })
    }
}

/// Keyword matching semantics. Table-style keyword lists contain stems, so
/// prefix matching is the default; exact matching is available via flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    #[default]
    Prefix,
    Exact,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "prefix" => Ok(MatchMode::Prefix),
            "exact" => Ok(MatchMode::Exact),
            other => Err(Error::InvalidInput(format!(
                "unknown match mode `{other}` (expected prefix or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterStats {
    pub retained: usize,
    pub removed: usize,
    pub removed_fraction: f64,
}

/// Partition of a corpus by the keyword pre-filter.
#[derive(Debug)]
pub struct FilterOutcome {
    pub retained: Vec<CommentRecord>,
    pub removed: Vec<CommentRecord>,
    pub stats: FilterStats,
}

/// Retain a comment iff at least one token hits the keyword list.
pub fn keyword_filter(
    comments: Vec<CommentRecord>,
    keywords: &KeywordList,
    mode: MatchMode,
) -> FilterOutcome {
    let total = comments.len();
    let (retained, removed): (Vec<_>, Vec<_>) = comments
        .into_iter()
        .partition(|c| keywords.matches(&c.tokens, mode));
    let stats = FilterStats {
        retained: retained.len(),
        removed: removed.len(),
        removed_fraction: if total == 0 {
            0.0
        } else {
            removed.len() as f64 / total as f64
        },
    };
    FilterOutcome {
        retained,
        removed,
        stats,
    }
}

/// Partition comments by the calendar month of their timestamp (UTC).
pub fn bucket_by_month(comments: Vec<CommentRecord>) -> BTreeMap<MonthKey, Vec<CommentRecord>> {
    let mut buckets: BTreeMap<MonthKey, Vec<CommentRecord>> = BTreeMap::new();
    for comment in comments {
        buckets.entry(comment.month()).or_default().push(comment);
    }
    buckets
}

/// Downsample every bucket independently and uniformly without replacement
/// to at most `n` comments, preserving input order within a bucket.
///
/// Each month draws from its own seed-derived stream, so results do not
/// depend on the order months are processed in.
pub fn monthly_sample(
    buckets: BTreeMap<MonthKey, Vec<CommentRecord>>,
    n: usize,
    seed: u64,
) -> BTreeMap<MonthKey, Vec<CommentRecord>> {
    buckets
        .into_iter()
        .map(|(month, comments)| {
            if comments.len() <= n {
                return (month, comments);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(month_stream(seed, month));
            let mut keep = rand::seq::index::sample(&mut rng, comments.len(), n).into_vec();
            keep.sort_unstable();
            let mut iter = comments.into_iter();
            let mut sampled = Vec::with_capacity(n);
            let mut cursor = 0usize;
            for idx in keep {
                let skip = idx - cursor;
                sampled.push(iter.nth(skip).expect("index within bucket"));
                cursor = idx + 1;
            }
            (month, sampled)
        })
        .collect()
}
