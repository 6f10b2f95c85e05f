use thiserror::Error;

/// Errors surfaced by the corpus-analysis pipeline.
///
/// Everything here is an input or configuration problem; internal invariant
/// violations panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}` in input header")]
    MissingColumn(String),

    #[error("empty baseline")]
    EmptyBaseline,

    #[error("empty frequency table for period `{0}`")]
    EmptyTable(String),

    #[error("unknown word `{0}`: absent from both baseline and month")]
    UnknownWord(String),

    #[error("degenerate vocabulary: need at least 2 words, got {0}")]
    DegenerateVocabulary(usize),

    #[error("no eligible items: every pool weight is undefined")]
    NoEligibleItems,

    #[error("invalid weight {weight} for item `{id}`: weights must be finite and > 0")]
    InvalidWeight { id: String, weight: f64 },

    #[error("unadjudicated disagreement: annotators disagree and no supervisor label given")]
    UnadjudicatedDisagreement,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("probability {0} outside [0, 1]")]
    ProbOutOfRange(f64),

    #[error("month `{0}` not present in model")]
    UnknownMonth(String),

    #[error("prediction files disagree on record ids; missing: {}", format_ids(.missing))]
    IdMismatch { missing: Vec<String> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_ids(ids: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = ids.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        out.push_str(&format!(", ... ({} total)", ids.len()));
    }
    out
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
