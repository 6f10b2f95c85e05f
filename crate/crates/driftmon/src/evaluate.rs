//! Annotation adjudication, agreement, classifier confidence, confusion
//! metrics and the sliced report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use crate::error::{Error, Result};
use crate::types::{AnnotationRecord, Label};

/// Agreement keeps the shared label; disagreement defers to the supervisor.
pub fn adjudicate(a1: Label, a2: Label, supervisor: Option<Label>) -> Result<Label> {
    if a1 == a2 {
        Ok(a1)
    } else {
        supervisor.ok_or(Error::UnadjudicatedDisagreement)
    }
}

/// Cohen's kappa over two equal-length label sequences.
pub fn cohens_kappa(a: &[Label], b: &[Label]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty label sequences".into()));
    }
    let n = a.len() as f64;
    let mut agree = 0u64;
    let mut marg_a = [0u64; 2];
    let mut marg_b = [0u64; 2];
    for (x, y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        marg_a[class_index(*x)] += 1;
        marg_b[class_index(*y)] += 1;
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = (0..2)
        .map(|c| (marg_a[c] as f64 / n) * (marg_b[c] as f64 / n))
        .sum();
    if p_e >= 1.0 {
        // both raters constant on the same class, so observed agreement is 1
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Distance of a positive-class probability from maximal uncertainty:
/// |0.5 − prob|, in [0, 0.5].
pub fn confidence(prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::ProbOutOfRange(prob));
    }
    Ok((0.5 - prob).abs())
}

/// Hard label from a positive-class probability: ≥ 0.5 means AntiVax.
pub fn classify(prob: f64) -> Result<Label> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::ProbOutOfRange(prob));
    }
    Ok(if prob >= 0.5 {
        Label::AntiVax
    } else {
        Label::Other
    })
}

fn class_index(label: Label) -> usize {
    match label {
        Label::AntiVax => 0,
        Label::Other => 1,
    }
}

pub const CLASS_ORDER: [Label; 2] = [Label::AntiVax, Label::Other];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// One evaluation table: confusion counts (gold × predicted), accuracy,
/// per-class and averaged metrics, and the slice the records came from.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub slice: Option<String>,
    pub support: usize,
    /// Row = gold class, column = predicted class, in [`CLASS_ORDER`].
    pub confusion: [[u64; 2]; 2],
    pub accuracy: f64,
    pub per_class: [(Label, ClassMetrics); 2],
    pub macro_avg: ClassMetrics,
    pub weighted_avg: ClassMetrics,
    pub mean_confidence: Option<f64>,
}

impl EvalReport {
    pub fn class_metrics(&self, label: Label) -> &ClassMetrics {
        &self.per_class[class_index(label)].1
    }
}

fn divide_or_zero(num: f64, den: f64, what: &str, label: Label) -> f64 {
    if den == 0.0 {
        log::warn!("{what} undefined for class {label:?} (0/0), reporting 0");
        0.0
    } else {
        num / den
    }
}

/// Per-class precision/recall/F1 plus accuracy and macro/weighted averages.
pub fn confusion_metrics(gold: &[Label], predicted: &[Label]) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::InvalidInput("empty label sequences".into()));
    }

    let mut confusion = [[0u64; 2]; 2];
    for (g, p) in gold.iter().zip(predicted) {
        confusion[class_index(*g)][class_index(*p)] += 1;
    }
    let total = gold.len() as f64;
    let accuracy = (confusion[0][0] + confusion[1][1]) as f64 / total;

    let mut per_class = [(Label::AntiVax, ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0 }); 2];
    let mut macro_avg = ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0 };
    let mut weighted_avg = ClassMetrics { precision: 0.0, recall: 0.0, f1: 0.0 };
    for label in CLASS_ORDER {
        let c = class_index(label);
        let tp = confusion[c][c] as f64;
        let predicted_c = (confusion[0][c] + confusion[1][c]) as f64;
        let gold_c = (confusion[c][0] + confusion[c][1]) as f64;
        let precision = divide_or_zero(tp, predicted_c, "precision", label);
        let recall = divide_or_zero(tp, gold_c, "recall", label);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let metrics = ClassMetrics { precision, recall, f1 };
        per_class[c] = (label, metrics);

        macro_avg.precision += precision / 2.0;
        macro_avg.recall += recall / 2.0;
        macro_avg.f1 += f1 / 2.0;
        let weight = gold_c / total;
        weighted_avg.precision += weight * precision;
        weighted_avg.recall += weight * recall;
        weighted_avg.f1 += weight * f1;
    }

    Ok(EvalReport {
        slice: None,
        support: gold.len(),
        confusion,
        accuracy,
        per_class,
        macro_avg,
        weighted_avg,
        mean_confidence: None,
    })
}

/// One test record joined with its prediction and comment weirdness.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub id: String,
    pub gold: Label,
    pub prob: f64,
    pub weirdness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceOp {
    Lt,
    Gt,
}

/// Records whose comment weirdness clears the threshold. Records with
/// undefined weirdness fall in no slice.
pub fn slice_by_weirdness(records: &[EvalRecord], op: SliceOp, threshold: f64) -> Vec<&EvalRecord> {
    records
        .iter()
        .filter(|r| match (r.weirdness, op) {
            (Some(w), SliceOp::Lt) => w < threshold,
            (Some(w), SliceOp::Gt) => w > threshold,
            (None, _) => false,
        })
        .collect()
}

/// The middle band `low ≤ weirdness ≤ high`; with the two threshold slices
/// this partitions the defined-weirdness records.
pub fn slice_band(records: &[EvalRecord], low: f64, high: f64) -> Vec<&EvalRecord> {
    records
        .iter()
        .filter(|r| r.weirdness.is_some_and(|w| (low..=high).contains(&w)))
        .collect()
}

/// Records excluded from every slice.
pub fn undefined_weirdness(records: &[EvalRecord]) -> Vec<&EvalRecord> {
    records.iter().filter(|r| r.weirdness.is_none()).collect()
}

/// Full report over a record slice: labels from thresholded probabilities,
/// metrics from [`confusion_metrics`], mean confidence filled in.
pub fn evaluate_records(records: &[&EvalRecord], slice: Option<String>) -> Result<EvalReport> {
    let gold: Vec<Label> = records.iter().map(|r| r.gold).collect();
    let predicted: Vec<Label> = records
        .iter()
        .map(|r| classify(r.prob))
        .collect::<Result<_>>()?;
    let mut report = confusion_metrics(&gold, &predicted)?;
    let conf_sum: f64 = records
        .iter()
        .map(|r| confidence(r.prob))
        .sum::<Result<f64>>()?;
    report.mean_confidence = Some(conf_sum / records.len() as f64);
    report.slice = slice;
    Ok(report)
}

/// Mean confidence of one model per weirdness slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceRow {
    pub low: Option<f64>,
    pub all: f64,
    pub high: Option<f64>,
    pub band: Option<f64>,
}

/// Per-model mean confidence for weird<low, all records, weird>high, plus
/// the middle band for slice-partition audit.
#[derive(Debug, Clone)]
pub struct ConfidenceTable {
    pub threshold_low: f64,
    pub threshold_high: f64,
    pub rows: BTreeMap<String, ConfidenceRow>,
    /// Records with undefined weirdness: counted in `all`, in no slice.
    pub undefined_weirdness: usize,
}

/// Build the confidence table for several models over one shared record set.
///
/// `models` maps model name to its id→probability predictions; `weirdness`
/// maps id to comment weirdness. Models must cover identical id sets.
pub fn confidence_table(
    models: &BTreeMap<String, BTreeMap<String, f64>>,
    weirdness: &BTreeMap<String, Option<f64>>,
    threshold_low: f64,
    threshold_high: f64,
) -> Result<ConfidenceTable> {
    let mut model_iter = models.iter();
    let (_, first) = model_iter
        .next()
        .ok_or_else(|| Error::InvalidInput("no prediction files given".into()))?;
    let reference: BTreeSet<&String> = first.keys().collect();
    if reference.is_empty() {
        return Err(Error::InvalidInput("prediction file has no records".into()));
    }
    for (_, preds) in model_iter {
        let ids: BTreeSet<&String> = preds.keys().collect();
        if ids != reference {
            let missing: Vec<String> = reference
                .symmetric_difference(&ids)
                .map(|s| s.to_string())
                .collect();
            return Err(Error::IdMismatch { missing });
        }
    }

    let lookup = |id: &String| weirdness.get(id).copied().flatten();
    let undefined = reference.iter().filter(|id| lookup(id).is_none()).count();

    let mut rows = BTreeMap::new();
    for (name, preds) in models {
        let mut all = MeanAcc::default();
        let mut low = MeanAcc::default();
        let mut high = MeanAcc::default();
        let mut band = MeanAcc::default();
        for (id, &prob) in preds {
            let c = confidence(prob)?;
            all.add(c);
            match lookup(id) {
                Some(w) if w < threshold_low => low.add(c),
                Some(w) if w > threshold_high => high.add(c),
                Some(_) => band.add(c),
                None => {}
            }
        }
        rows.insert(
            name.clone(),
            ConfidenceRow {
                low: low.mean(),
                all: all.mean().expect("nonempty reference id set"),
                high: high.mean(),
                band: band.mean(),
            },
        );
    }

    Ok(ConfidenceTable {
        threshold_low,
        threshold_high,
        rows,
        undefined_weirdness: undefined,
    })
}

#[derive(Default)]
struct MeanAcc {
    sum: f64,
    n: usize,
}

impl MeanAcc {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt2_opt(v: Option<f64>) -> String {
    v.map(fmt2).unwrap_or_else(|| "-".into())
}

/// Aligned-text confidence table. Cells are two-space separated at two
/// decimals; the middle band is appended as a trailing audit column.
pub fn render_confidence_table(table: &ConfidenceTable) -> String {
    let low = table.threshold_low;
    let high = table.threshold_high;
    let mut out = String::from("Confidence level of models\n");
    out.push_str(&format!(
        "Model  Weird<{low}  All test data  Weird>{high}  Weird {low}-{high}\n"
    ));
    for (name, row) in &table.rows {
        out.push_str(&format!(
            "{name}  {}  {}  {}  {}\n",
            fmt2_opt(row.low),
            fmt2(row.all),
            fmt2_opt(row.high),
            fmt2_opt(row.band),
        ));
    }
    if table.undefined_weirdness > 0 {
        out.push_str(&format!(
            "({} records with undefined weirdness count toward `all` only)\n",
            table.undefined_weirdness
        ));
    }
    out
}

/// Aligned-text model-performance table: one AntiVax row carrying accuracy,
/// one continuation row per model for the other class, cells two-space
/// separated at two decimals.
pub fn render_model_table(title: &str, models: &[(String, EvalReport)]) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str("Model  Class  Accuracy  f1-score  Precision  Recall\n");
    for (name, report) in models {
        let anti = report.class_metrics(Label::AntiVax);
        out.push_str(&format!(
            "{name}  {}  {}  {}  {}  {}\n",
            Label::AntiVax.display_name(),
            fmt2(report.accuracy),
            fmt2(anti.f1),
            fmt2(anti.precision),
            fmt2(anti.recall),
        ));
        let other = report.class_metrics(Label::Other);
        out.push_str(&format!(
            "  {}    {}  {}  {}\n",
            Label::Other.display_name(),
            fmt2(other.f1),
            fmt2(other.precision),
            fmt2(other.recall),
        ));
    }
    out
}

/// Read a prediction CSV with columns `id,prob`.
pub fn read_predictions<R: Read>(reader: R) -> Result<BTreeMap<String, f64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| Error::MissingColumn("id".into()))?;
    let prob_col = headers
        .iter()
        .position(|h| h == "prob")
        .ok_or_else(|| Error::MissingColumn("prob".into()))?;
    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let raw = record.get(prob_col).unwrap_or("");
        let prob: f64 = raw
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad probability `{raw}` for id `{id}`")))?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::ProbOutOfRange(prob));
        }
        if out.insert(id.clone(), prob).is_some() {
            return Err(Error::InvalidInput(format!("duplicate prediction id `{id}`")));
        }
    }
    Ok(out)
}

/// Read a gold annotation CSV with columns `id,annotator1,annotator2,supervisor`
/// (supervisor may be empty on agreement) and adjudicate each row.
pub fn read_gold<R: Read>(reader: R) -> Result<BTreeMap<String, AnnotationRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let id_col = col("id")?;
    let a1_col = col("annotator1")?;
    let a2_col = col("annotator2")?;
    let sup_col = headers.iter().position(|h| h == "supervisor");

    let mut out = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let parse = |idx: usize| -> Result<Label> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse()
                .map_err(|_| Error::InvalidInput(format!("unknown label `{raw}` for id `{id}`")))
        };
        let annotator1 = parse(a1_col)?;
        let annotator2 = parse(a2_col)?;
        let supervisor = match sup_col.map(|i| record.get(i).unwrap_or("")) {
            Some("") | None => None,
            Some(raw) => Some(raw.parse().map_err(|_| {
                Error::InvalidInput(format!("unknown supervisor label `{raw}` for id `{id}`"))
            })?),
        };
        let final_label = adjudicate(annotator1, annotator2, supervisor)?;
        if out
            .insert(
                id.clone(),
                AnnotationRecord {
                    annotator1,
                    annotator2,
                    supervisor,
                    final_label,
                },
            )
            .is_some()
        {
            return Err(Error::InvalidInput(format!("duplicate gold id `{id}`")));
        }
    }
    Ok(out)
}
