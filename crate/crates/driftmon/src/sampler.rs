//! Re-annotation sampling: uniform and weirdness-weighted draws without
//! replacement, plus the overlap report between two samples.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// One comment eligible for sampling. `weight` is its comment weirdness;
/// `None` marks an undefined weirdness (all tokens out of vocabulary).
#[derive(Debug, Clone, PartialEq)]
pub struct PoolItem {
    pub id: String,
    pub weight: Option<f64>,
}

/// The pool both strategies draw from.
#[derive(Debug, Clone)]
pub struct SamplePool {
    items: Vec<PoolItem>,
    pub seed: u64,
}

impl SamplePool {
    /// Validates id uniqueness and that every defined weight is finite and
    /// strictly positive.
    pub fn new(items: Vec<PoolItem>, seed: u64) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate pool id `{}`",
                    item.id
                )));
            }
            if let Some(w) = item.weight {
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::InvalidWeight {
                        id: item.id.clone(),
                        weight: w,
                    });
                }
            }
        }
        Ok(Self { items, seed })
    }

    pub fn items(&self) -> &[PoolItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Ids excluded from the weighted draw for lack of a defined weight.
    pub fn undefined_ids(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| i.weight.is_none())
            .map(|i| i.id.as_str())
            .collect()
    }

    /// Read a pool CSV with columns `id,weight`; an empty weight cell means
    /// undefined.
    pub fn read_csv<R: Read>(reader: R, seed: u64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let id_col = headers
            .iter()
            .position(|h| h == "id")
            .ok_or_else(|| Error::MissingColumn("id".into()))?;
        let weight_col = headers
            .iter()
            .position(|h| h == "weight")
            .ok_or_else(|| Error::MissingColumn("weight".into()))?;
        let mut items = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let id = record.get(id_col).unwrap_or("").to_string();
            let raw = record.get(weight_col).unwrap_or("");
            let weight = if raw.is_empty() {
                None
            } else {
                Some(raw.parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("bad weight `{raw}` for id `{id}`"))
                })?)
            };
            items.push(PoolItem { id, weight });
        }
        Self::new(items, seed)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["id", "weight"])?;
        for item in &self.items {
            let cell = item.weight.map(|w| w.to_string()).unwrap_or_default();
            csv.write_record([item.id.as_str(), cell.as_str()])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// Uniform sample without replacement of size `min(n, pool size)`,
/// deterministic per seed.
pub fn random_sample(pool: &SamplePool, n: usize, seed: u64) -> Vec<String> {
    let take = n.min(pool.len());
    if take == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, pool.len(), take)
        .into_iter()
        .map(|i| pool.items[i].id.clone())
        .collect()
}

/// Weighted sample without replacement of size `min(n, eligible pool size)`
/// by the exponential-key method: each eligible item draws u ~ uniform(0,1)
/// and the items with the largest keys u^(1/w) win (computed as ln(u)/w for
/// stability; the ranking is identical). Ties break by id order. Items with
/// undefined weight are excluded before any randomness is consumed.
pub fn weighted_sample(pool: &SamplePool, n: usize, seed: u64) -> Result<Vec<String>> {
    let eligible: Vec<&PoolItem> = pool.items.iter().filter(|i| i.weight.is_some()).collect();
    if eligible.is_empty() && !pool.is_empty() {
        return Err(Error::NoEligibleItems);
    }
    let excluded = pool.len() - eligible.len();
    if excluded > 0 {
        log::warn!("weighted sample: excluded {excluded} items with undefined weight");
    }
    let take = n.min(eligible.len());
    if take == 0 {
        return Ok(Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, &str)> = eligible
        .iter()
        .map(|item| {
            let weight = item.weight.expect("filtered to defined weights");
            let u: f64 = rng.random();
            (u.ln() / weight, item.id.as_str())
        })
        .collect();
    keyed.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("keys are finite or -inf, never NaN")
            .then_with(|| a.1.cmp(b.1))
    });
    Ok(keyed
        .into_iter()
        .take(take)
        .map(|(_, id)| id.to_string())
        .collect())
}

/// Exact set intersection of two id samples.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct OverlapReport {
    pub count: usize,
    pub ids: Vec<String>,
}

pub fn overlap_report(sample_a: &[String], sample_b: &[String]) -> OverlapReport {
    let a: BTreeSet<&str> = sample_a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = sample_b.iter().map(String::as_str).collect();
    let ids: Vec<String> = a.intersection(&b).map(|s| s.to_string()).collect();
    OverlapReport {
        count: ids.len(),
        ids,
    }
}
