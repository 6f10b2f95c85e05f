//! Synthetic corpus generator with analytically known per-month token
//! distributions, used as the ground-truth oracle for the statistics
//! pipeline.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{derive_seed, CommentRecord, MonthKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokensPerComment {
    Fixed(usize),
    Uniform { min: usize, max: usize },
}

/// Ground-truth corpus description: a baseline token distribution and
/// per-month multiplier schedules (renormalized per month).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftSpec {
    pub vocabulary: Vec<String>,
    pub baseline_probs: Vec<f64>,
    /// Per month, per word; missing words default to multiplier 1.
    pub monthly_multipliers: BTreeMap<MonthKey, BTreeMap<String, f64>>,
    pub comments_per_month: usize,
    /// Baseline size; defaults to `comments_per_month`.
    #[serde(default)]
    pub baseline_comments: Option<usize>,
    /// Baseline period; defaults to the month before the first target month.
    #[serde(default)]
    pub baseline_start: Option<MonthKey>,
    #[serde(default)]
    pub baseline_end: Option<MonthKey>,
    pub tokens_per_comment: TokensPerComment,
    #[serde(default)]
    pub seed: u64,
}

impl DriftSpec {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let spec: DriftSpec = serde_json::from_reader(reader)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocabulary.is_empty() {
            return Err(Error::InvalidInput("vocabulary is empty".into()));
        }
        let mut sorted = self.vocabulary.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.vocabulary.len() {
            return Err(Error::InvalidInput("duplicate vocabulary words".into()));
        }
        if self.baseline_probs.len() != self.vocabulary.len() {
            return Err(Error::InvalidInput(format!(
                "baseline_probs has {} entries for {} words",
                self.baseline_probs.len(),
                self.vocabulary.len()
            )));
        }
        if self.baseline_probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput(
                "baseline_probs must all be positive and finite".into(),
            ));
        }
        let sum: f64 = self.baseline_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "baseline_probs sum to {sum}, expected 1"
            )));
        }
        if self.monthly_multipliers.is_empty() {
            return Err(Error::InvalidInput("no months in spec".into()));
        }
        for (month, multipliers) in &self.monthly_multipliers {
            for (word, &mult) in multipliers {
                if !self.vocabulary.contains(word) {
                    return Err(Error::InvalidInput(format!(
                        "month {month} has a multiplier for unknown word `{word}`"
                    )));
                }
                if !mult.is_finite() || mult <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "month {month} multiplier for `{word}` must be positive, got {mult}"
                    )));
                }
            }
        }
        if self.comments_per_month == 0 {
            return Err(Error::InvalidInput("comments_per_month must be ≥ 1".into()));
        }
        match self.tokens_per_comment {
            TokensPerComment::Fixed(n) if n == 0 => {
                return Err(Error::InvalidInput("tokens_per_comment must be ≥ 1".into()))
            }
            TokensPerComment::Uniform { min, max } if min == 0 || min > max => {
                return Err(Error::InvalidInput(format!(
                    "bad tokens_per_comment range [{min}, {max}]"
                )))
            }
            _ => {}
        }
        let (start, end) = self.baseline_period();
        if start > end {
            return Err(Error::InvalidInput(format!(
                "baseline start {start} is after baseline end {end}"
            )));
        }
        Ok(())
    }

    pub fn months(&self) -> impl Iterator<Item = MonthKey> + '_ {
        self.monthly_multipliers.keys().copied()
    }

    pub fn baseline_period(&self) -> (MonthKey, MonthKey) {
        let first_month = *self
            .monthly_multipliers
            .keys()
            .next()
            .expect("validated: at least one month");
        let default = first_month.pred();
        (
            self.baseline_start.unwrap_or(default),
            self.baseline_end.unwrap_or_else(|| self.baseline_start.unwrap_or(default)),
        )
    }

    fn multiplier(&self, month: MonthKey, word: &str) -> f64 {
        self.monthly_multipliers
            .get(&month)
            .and_then(|m| m.get(word).copied())
            .unwrap_or(1.0)
    }

    /// Renormalized token probabilities for one month.
    pub fn month_probs(&self, month: MonthKey) -> Result<Vec<f64>> {
        if !self.monthly_multipliers.contains_key(&month) {
            return Err(Error::UnknownMonth(month.to_string()));
        }
        let raw: Vec<f64> = self
            .vocabulary
            .iter()
            .zip(&self.baseline_probs)
            .map(|(word, &p)| p * self.multiplier(month, word))
            .collect();
        let z: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|p| p / z).collect())
    }

    /// Analytic weirdness for one month: p_month(w) / p_baseline(w), which
    /// reduces to multiplier(w) over the month's renormalizer.
    pub fn expected_weirdness(&self, month: MonthKey) -> Result<BTreeMap<String, f64>> {
        let probs = self.month_probs(month)?;
        Ok(self
            .vocabulary
            .iter()
            .zip(&self.baseline_probs)
            .zip(probs)
            .map(|((word, &base), month_p)| (word.clone(), month_p / base))
            .collect())
    }
}

/// Population standard deviation of the analytic weirdness values of one
/// month.
pub fn expected_drift_indicator(spec: &DriftSpec, month: MonthKey) -> Result<f64> {
    let values: Vec<f64> = spec.expected_weirdness(month)?.into_values().collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(variance.sqrt())
}

/// A generated corpus together with its analytic oracle.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub baseline: Vec<CommentRecord>,
    pub months: BTreeMap<MonthKey, Vec<CommentRecord>>,
    pub expected_weirdness: BTreeMap<MonthKey, BTreeMap<String, f64>>,
}

fn month_span_seconds(month: MonthKey) -> (chrono::DateTime<Utc>, i64) {
    let start = Utc
        .with_ymd_and_hms(month.year(), month.month(), 1, 0, 0, 0)
        .unwrap();
    let next = month.succ();
    let end = Utc
        .with_ymd_and_hms(next.year(), next.month(), 1, 0, 0, 0)
        .unwrap();
    (start, (end - start).num_seconds())
}

fn draw_comments(
    spec: &DriftSpec,
    rng: &mut ChaCha8Rng,
    probs: &[f64],
    count: usize,
    months: &[MonthKey],
    id_prefix: &str,
) -> Result<Vec<CommentRecord>> {
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::InvalidInput(format!("bad token distribution: {e}")))?;
    let spans: Vec<(chrono::DateTime<Utc>, i64)> =
        months.iter().map(|&m| month_span_seconds(m)).collect();
    let total_seconds: i64 = spans.iter().map(|(_, s)| s).sum();

    let mut comments = Vec::with_capacity(count);
    for i in 0..count {
        let len = match spec.tokens_per_comment {
            TokensPerComment::Fixed(n) => n,
            TokensPerComment::Uniform { min, max } => rng.random_range(min..=max),
        };
        let tokens: Vec<String> = (0..len)
            .map(|_| spec.vocabulary[dist.sample(rng)].clone())
            .collect();
        // uniform over the whole period, mapped onto the right month
        let mut offset = rng.random_range(0..total_seconds);
        let mut timestamp = None;
        for (start, span) in &spans {
            if offset < *span {
                timestamp = Some(*start + chrono::Duration::seconds(offset));
                break;
            }
            offset -= span;
        }
        comments.push(CommentRecord::new(
            format!("{id_prefix}{i:07}"),
            timestamp.expect("offset within total span"),
            tokens,
        ));
    }
    Ok(comments)
}

/// Generate the baseline and every month of the spec. Each period draws from
/// its own substream of the spec seed, so months can be generated in any
/// order (or in parallel) with identical results.
pub fn generate_corpus(spec: &DriftSpec) -> Result<GeneratedCorpus> {
    spec.validate()?;

    let (base_start, base_end) = spec.baseline_period();
    let base_months = base_start.range_to(base_end);
    let base_count = spec.baseline_comments.unwrap_or(spec.comments_per_month);
    let mut base_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0xBA5E]));
    let baseline = draw_comments(
        spec,
        &mut base_rng,
        &spec.baseline_probs,
        base_count,
        &base_months,
        "base-",
    )?;

    let mut months = BTreeMap::new();
    let mut expected = BTreeMap::new();
    for month in spec.months() {
        let stream = derive_seed(
            spec.seed,
            &[0xD21F7, month.year() as u64, month.month() as u64],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let probs = spec.month_probs(month)?;
        let comments = draw_comments(
            spec,
            &mut rng,
            &probs,
            spec.comments_per_month,
            &[month],
            &format!("{month}-"),
        )?;
        months.insert(month, comments);
        expected.insert(month, spec.expected_weirdness(month)?);
    }

    Ok(GeneratedCorpus {
        baseline,
        months,
        expected_weirdness: expected,
    })
}
