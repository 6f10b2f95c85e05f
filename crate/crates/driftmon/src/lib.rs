//! Temporal drift monitoring for timestamped text corpora.
//!
//! The pipeline: ingest timestamped comments, filter them by keyword, bucket
//! them by calendar month, compare each month's word frequencies against a
//! baseline period via the weirdness ratio, track the monthly drift
//! indicator, draw re-annotation samples weighted by comment weirdness, and
//! evaluate classifier prediction files over weirdness slices.
//!
//! [`driftgen`] generates synthetic corpora with analytically known
//! distributions so every statistic can be checked against a closed-form
//! oracle.

pub mod driftgen;
mod error;
pub mod evaluate;
pub mod ingest;
pub mod sampler;
pub mod svg;
pub mod tokenize;
mod types;
pub mod weirdness;

pub use error::{Error, Result};
pub use types::{AnnotationRecord, CommentRecord, Label, MonthKey};
