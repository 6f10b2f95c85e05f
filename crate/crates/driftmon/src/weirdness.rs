//! Frequency tables, the word-level weirdness ratio, comment-level
//! averaging and the monthly drift indicator.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::types::{CommentRecord, MonthKey};

/// Which period a frequency table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Baseline,
    Month(MonthKey),
}

impl std::fmt::Display for Period {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Period::Baseline => write!(f, "baseline"),
            Period::Month(m) => write!(f, "{m}"),
        }
    }
}

impl std::str::FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "baseline" {
            Ok(Period::Baseline)
        } else {
            Ok(Period::Month(s.parse()?))
        }
    }
}

/// Word counts over one period. Stored words always have count ≥ 1 and
/// `total` is the sum of stored counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    period: Period,
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    /// Count all tokens of all comments, then drop words with count below
    /// `min_count` and recompute the total over the kept words.
    pub fn build(comments: &[CommentRecord], period: Period, min_count: u64) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for comment in comments {
            for token in &comment.tokens {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        Self::from_counts(
            counts.into_iter().map(|(w, c)| (w.to_string(), c)),
            period,
        )
        .thresholded(min_count)
    }

    /// Build directly from word counts; zero-count words are dropped.
    pub fn from_counts<I>(counts: I, period: Period) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut map: BTreeMap<String, u64> = BTreeMap::new();
        for (word, count) in counts {
            if count > 0 {
                *map.entry(word).or_insert(0) += count;
            }
        }
        let total = map.values().sum();
        Self {
            period,
            counts: map,
            total,
        }
    }

    /// A copy without words below `min_count`, total recomputed.
    pub fn thresholded(&self, min_count: u64) -> Self {
        if min_count <= 1 {
            return self.clone();
        }
        let counts: BTreeMap<String, u64> = self
            .counts
            .iter()
            .filter(|(_, &c)| c >= min_count)
            .map(|(w, &c)| (w.clone(), c))
            .collect();
        let total = counts.values().sum();
        Self {
            period: self.period,
            counts,
            total,
        }
    }

    /// Fold another shard's counts into this table. Shards of one period may
    /// be counted independently and merged in any order.
    pub fn merge_from(&mut self, other: &FrequencyTable) {
        for (word, &count) in &other.counts {
            *self.counts.entry(word.clone()).or_insert(0) += count;
        }
        self.total += other.total;
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Words with their counts, sorted by word.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    /// Write as `word,count` rows under a comment line carrying period and
    /// total, rows sorted by descending count then word.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# period={} total={}", self.period, self.total)?;
        let mut rows: Vec<(&str, u64)> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["word", "count"])?;
        for (word, count) in rows {
            csv.write_record([word, &count.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Read a table written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut reader = BufReader::new(reader);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let header = header.trim();
        let mut period = None;
        let mut total = None;
        for part in header.trim_start_matches('#').split_whitespace() {
            if let Some(p) = part.strip_prefix("period=") {
                period = Some(p.parse::<Period>()?);
            } else if let Some(t) = part.strip_prefix("total=") {
                total = Some(t.parse::<u64>().map_err(|_| {
                    Error::InvalidInput(format!("bad total in table header: `{header}`"))
                })?);
            }
        }
        let (period, total) = match (period, total) {
            (Some(p), Some(t)) => (p, t),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "frequency table header must carry period and total, got `{header}`"
                )))
            }
        };

        let mut csv = csv::Reader::from_reader(reader);
        let mut counts = Vec::new();
        for record in csv.records() {
            let record = record?;
            let word = record
                .get(0)
                .ok_or_else(|| Error::InvalidInput("missing word cell".into()))?;
            let count: u64 = record
                .get(1)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad count for word `{word}`")))?;
            counts.push((word.to_string(), count));
        }
        let table = Self::from_counts(counts, period);
        if table.total != total {
            return Err(Error::InvalidInput(format!(
                "table total {} does not match header total {total}",
                table.total
            )));
        }
        Ok(table)
    }
}

/// `counts[word]/total`; 0 for an absent word. Pre-smoothing value.
pub fn baseline_ratio(baseline: &FrequencyTable, word: &str) -> Result<f64> {
    if baseline.total == 0 {
        return Err(Error::EmptyBaseline);
    }
    Ok(baseline.count(word) as f64 / baseline.total as f64)
}

/// Weirdness of one word: the month relative frequency over the baseline
/// relative frequency, both additively smoothed by `epsilon` over the union
/// vocabulary of the two tables.
///
/// With `epsilon = 0` the raw frequency ratio applies: a word absent from the
/// baseline gets the distinguished value `+∞` (reported, never averaged),
/// and a word absent from both tables is an error.
pub fn word_weirdness(
    baseline: &FrequencyTable,
    month_table: &FrequencyTable,
    word: &str,
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must be a nonnegative number, got {epsilon}"
        )));
    }
    if baseline.total == 0 {
        return Err(Error::EmptyBaseline);
    }
    if month_table.total == 0 {
        return Err(Error::EmptyTable(month_table.period.to_string()));
    }

    let c_m = month_table.count(word) as f64;
    let c_b = baseline.count(word) as f64;
    if epsilon == 0.0 {
        if c_b == 0.0 {
            return if c_m == 0.0 {
                Err(Error::UnknownWord(word.to_string()))
            } else {
                Ok(f64::INFINITY)
            };
        }
        let month_ratio = c_m / month_table.total as f64;
        let base_ratio = c_b / baseline.total as f64;
        return Ok(month_ratio / base_ratio);
    }

    let union_vocab = union_vocab_size(baseline, month_table) as f64;
    let month_ratio = (c_m + epsilon) / (month_table.total as f64 + epsilon * union_vocab);
    let base_ratio = (c_b + epsilon) / (baseline.total as f64 + epsilon * union_vocab);
    Ok(month_ratio / base_ratio)
}

fn union_vocab_size(a: &FrequencyTable, b: &FrequencyTable) -> usize {
    let (small, large) = if a.vocab_size() <= b.vocab_size() {
        (a, b)
    } else {
        (b, a)
    };
    large.vocab_size() + small.words().filter(|w| !large.contains(w)).count()
}

/// Baseline table, per-month tables and the derived per-month weirdness maps
/// and drift indicators.
#[derive(Debug, Clone)]
pub struct WeirdnessModel {
    pub baseline: FrequencyTable,
    pub monthly: BTreeMap<MonthKey, FrequencyTable>,
    pub smoothing_epsilon: f64,
    pub min_baseline_count: u64,
    /// Per month: weirdness of every model-vocabulary word.
    pub word_weirdness: BTreeMap<MonthKey, BTreeMap<String, f64>>,
    pub drift_indicator: BTreeMap<MonthKey, f64>,
}

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_MIN_BASELINE_COUNT: u64 = 5;

impl WeirdnessModel {
    /// The words whose weirdness enters the drift indicator: baseline words
    /// with count ≥ `min_baseline_count`.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        let min = self.min_baseline_count;
        self.baseline
            .iter()
            .filter(move |&(_, c)| c >= min)
            .map(|(w, _)| w)
    }

    pub fn months(&self) -> impl Iterator<Item = MonthKey> + '_ {
        self.monthly.keys().copied()
    }
}

/// Build the full model: count the baseline and every month, then fill the
/// weirdness map and drift indicator per month over the model vocabulary.
pub fn compute_model(
    baseline_comments: &[CommentRecord],
    monthly_comments: &BTreeMap<MonthKey, Vec<CommentRecord>>,
    epsilon: f64,
    min_baseline_count: u64,
) -> Result<WeirdnessModel> {
    let baseline = FrequencyTable::build(baseline_comments, Period::Baseline, 1);
    if baseline.is_empty() {
        return Err(Error::EmptyBaseline);
    }
    if monthly_comments.is_empty() {
        return Err(Error::InvalidInput("no months to analyse".into()));
    }

    let min = min_baseline_count.max(1);
    let vocabulary: Vec<&str> = baseline
        .iter()
        .filter(|&(_, c)| c >= min)
        .map(|(w, _)| w)
        .collect();
    if vocabulary.len() < 2 {
        return Err(Error::DegenerateVocabulary(vocabulary.len()));
    }

    let mut monthly = BTreeMap::new();
    let mut weirdness_maps = BTreeMap::new();
    let mut indicators = BTreeMap::new();
    for (&month, comments) in monthly_comments {
        let table = FrequencyTable::build(comments, Period::Month(month), 1);
        if table.is_empty() {
            return Err(Error::EmptyTable(month.to_string()));
        }
        let mut map = BTreeMap::new();
        for &word in &vocabulary {
            let value = word_weirdness(&baseline, &table, word, epsilon)?;
            map.insert(word.to_string(), value);
        }
        indicators.insert(month, population_std_dev(map.values().copied()));
        weirdness_maps.insert(month, map);
        monthly.insert(month, table);
    }

    Ok(WeirdnessModel {
        baseline,
        monthly,
        smoothing_epsilon: epsilon,
        min_baseline_count: min,
        word_weirdness: weirdness_maps,
        drift_indicator: indicators,
    })
}

fn population_std_dev(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    variance.sqrt()
}

/// Population standard deviation of the month's weirdness values over the
/// model vocabulary.
pub fn drift_indicator(model: &WeirdnessModel, month: MonthKey) -> Result<f64> {
    let map = model
        .word_weirdness
        .get(&month)
        .ok_or_else(|| Error::UnknownMonth(month.to_string()))?;
    if map.len() < 2 {
        return Err(Error::DegenerateVocabulary(map.len()));
    }
    Ok(population_std_dev(map.values().copied()))
}

/// How tokens outside the model vocabulary enter a comment average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Drop the token from the average.
    #[default]
    Skip,
    /// Count the token as weirdness 1.0.
    TreatAsOne,
}

impl std::str::FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().replace('-', "_").as_str() {
            "skip" => Ok(OovPolicy::Skip),
            "treat_as_one" => Ok(OovPolicy::TreatAsOne),
            other => Err(Error::InvalidInput(format!(
                "unknown oov policy `{other}` (expected skip or treat-as-one)"
            ))),
        }
    }
}

/// Whether repeated tokens count once per occurrence or once per type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    #[default]
    TokenOccurrences,
    UniqueTypes,
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().replace('-', "_").as_str() {
            "tokens" | "token_occurrences" => Ok(Averaging::TokenOccurrences),
            "types" | "unique_types" => Ok(Averaging::UniqueTypes),
            other => Err(Error::InvalidInput(format!(
                "unknown averaging mode `{other}` (expected tokens or types)"
            ))),
        }
    }
}

/// Mean weirdness of a comment's tokens under the given month map, averaged
/// over token occurrences. `None` means undefined (empty comment, or all
/// tokens out of vocabulary under the skip policy).
pub fn comment_weirdness(
    tokens: &[String],
    month_map: &BTreeMap<String, f64>,
    oov_policy: OovPolicy,
) -> Option<f64> {
    comment_weirdness_with(tokens, month_map, oov_policy, Averaging::TokenOccurrences)
}

/// [`comment_weirdness`] with an explicit averaging mode.
///
/// Non-finite map values (the exact-mode `+∞` diagnostic) are treated as out
/// of vocabulary: reported upstream, never averaged.
pub fn comment_weirdness_with(
    tokens: &[String],
    month_map: &BTreeMap<String, f64>,
    oov_policy: OovPolicy,
    averaging: Averaging,
) -> Option<f64> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut sum = 0.0;
    let mut n = 0usize;
    for token in tokens {
        if averaging == Averaging::UniqueTypes && !seen.insert(token.as_str()) {
            continue;
        }
        match month_map.get(token).copied().filter(|v| v.is_finite()) {
            Some(value) => {
                sum += value;
                n += 1;
            }
            None => {
                if oov_policy == OovPolicy::TreatAsOne {
                    sum += 1.0;
                    n += 1;
                }
            }
        }
    }
    if tokens.is_empty() || n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}
