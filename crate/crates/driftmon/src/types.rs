//! Core record types shared across the pipeline.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Utc};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One calendar month, the bucketing unit for all temporal statistics.
///
/// Ordered by `(year, month)`; renders as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthKey {
    year: i32,
    month: u32,
}

impl MonthKey {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidInput(format!(
                "month must be in 1..=12, got {month}"
            )));
        }
        Ok(Self { year, month })
    }

    pub fn from_datetime(ts: &DateTime<Utc>) -> Self {
        Self {
            year: ts.year(),
            month: ts.month(),
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    /// The month immediately before this one.
    pub fn pred(&self) -> Self {
        if self.month == 1 {
            Self {
                year: self.year - 1,
                month: 12,
            }
        } else {
            Self {
                year: self.year,
                month: self.month - 1,
            }
        }
    }

    /// The month immediately after this one.
    pub fn succ(&self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Inclusive range of months from `self` through `end`.
    pub fn range_to(&self, end: MonthKey) -> Vec<MonthKey> {
        let mut out = Vec::new();
        let mut cur = *self;
        while cur <= end {
            out.push(cur);
            cur = cur.succ();
        }
        out
    }
}

impl fmt::Display for MonthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        MonthKey::new(year, month)
    }
}

impl Serialize for MonthKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MonthKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Binary comment category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    AntiVax,
    Other,
}

impl Label {
    /// The opposite category.
    pub fn flipped(&self) -> Self {
        match self {
            Label::AntiVax => Label::Other,
            Label::Other => Label::AntiVax,
        }
    }

    /// Row label used by the human-readable report tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            Label::AntiVax => "Anti-vaxxer",
            Label::Other => "Non anti-vaxxer, neutral",
        }
    }

    /// Short machine-readable name used in CSV output.
    pub fn short_name(&self) -> &'static str {
        match self {
            Label::AntiVax => "antivax",
            Label::Other => "other",
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "antivax" | "anti-vax" | "anti_vax" | "antivaxxer" | "anti-vaxxer" | "1" => {
                Ok(Label::AntiVax)
            }
            "other" | "non-antivax" | "non-anti-vax" | "neutral" | "provax" | "pro-vax" | "0" => {
                Ok(Label::Other)
            }
            other => Err(Error::InvalidInput(format!("unknown label `{other}`"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Double-annotation outcome for one comment.
///
/// Agreement fixes the final label; disagreement defers to the supervisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub annotator1: Label,
    pub annotator2: Label,
    pub supervisor: Option<Label>,
    pub final_label: Label,
}

/// One timestamped comment.
///
/// `tokens` is never null (an empty list is allowed); pre-lemmatized input is
/// accepted as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct CommentRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub tokens: Vec<String>,
    pub label: Option<Label>,
    pub predicted_prob: Option<f64>,
    pub annotations: Option<AnnotationRecord>,
}

impl CommentRecord {
    /// Minimal record for tests and generated corpora.
    pub fn new(id: impl Into<String>, timestamp: DateTime<Utc>, tokens: Vec<String>) -> Self {
        let tokens: Vec<String> = tokens;
        Self {
            id: id.into(),
            timestamp,
            text: tokens.join(" "),
            tokens,
            label: None,
            predicted_prob: None,
            annotations: None,
        }
    }

    pub fn month(&self) -> MonthKey {
        MonthKey::from_datetime(&self.timestamp)
    }
}

/// Derive an independent RNG stream seed from a base seed and a path of
/// stream coordinates (splitmix64 chain). Used so per-month work is
/// deterministic regardless of execution order.
pub(crate) fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut z = seed;
    for &p in path {
        z ^= p.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = splitmix64(z);
    }
    splitmix64(z)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn month_stream(seed: u64, month: MonthKey) -> u64 {
    derive_seed(seed, &[month.year() as u64, u64::from(month.month())])
}
