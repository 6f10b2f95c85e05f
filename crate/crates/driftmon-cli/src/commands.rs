//! Implementations of the six subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use driftmon::driftgen::{self, DriftSpec};
use driftmon::evaluate::{self, EvalRecord, EvalReport, SliceOp};
use driftmon::ingest::{self, FieldMap, InputFormat, MatchMode, TimestampFormat};
use driftmon::sampler::{self, PoolItem, SamplePool};
use driftmon::svg::{self, Series};
use driftmon::weirdness::{self, Averaging, OovPolicy, WeirdnessModel};
use driftmon::{CommentRecord, Label, MonthKey};

use crate::config::{
    FileConfig, Resolved, RunDir, DEFAULT_MONTHLY_SAMPLE, DEFAULT_SAMPLE_SIZE,
    DEFAULT_THRESHOLD_HIGH, DEFAULT_THRESHOLD_LOW,
};
use crate::{
    input_error, Cli, CliResult, EvaluateArgs, FilterArgs, FormatArg, ModelOpts, SampleArgs,
    SimulateArgs, StatsArgs, Strategy, WeirdnessArgs,
};

/// Merge the config file with the command line; flags win.
fn resolve(cli: &Cli, model: Option<&ModelOpts>) -> CliResult<(Resolved, PathBuf)> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out_root = cli
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("out"));
    let resolved = Resolved {
        baseline_start: model.and_then(|m| m.baseline_start).or(file.baseline_start),
        baseline_end: model.and_then(|m| m.baseline_end).or(file.baseline_end),
        monthly_sample: model
            .and_then(|m| m.monthly_sample)
            .or(file.monthly_sample)
            .unwrap_or(DEFAULT_MONTHLY_SAMPLE),
        epsilon: model
            .and_then(|m| m.epsilon)
            .or(file.epsilon)
            .unwrap_or(weirdness::DEFAULT_EPSILON),
        min_count: model
            .and_then(|m| m.min_count)
            .or(file.min_count)
            .unwrap_or(weirdness::DEFAULT_MIN_BASELINE_COUNT),
        threshold_low: file.threshold_low.unwrap_or(DEFAULT_THRESHOLD_LOW),
        threshold_high: file.threshold_high.unwrap_or(DEFAULT_THRESHOLD_HIGH),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        sample_size: file.sample_size.unwrap_or(DEFAULT_SAMPLE_SIZE),
    };
    Ok((resolved, out_root))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| input_error(format!("cannot open {}: {e}", path.display())))
}

/// Flags that change how an input corpus is parsed; part of the run id.
fn corpus_flags(cli: &Cli) -> String {
    let mut flags = String::new();
    match cli.format {
        Some(FormatArg::Jsonl) => flags.push_str(" --format jsonl"),
        Some(FormatArg::Csv) => flags.push_str(" --format csv"),
        None => {}
    }
    if cli.epoch_seconds {
        flags.push_str(" --epoch-seconds");
    }
    flags
}

fn read_corpus(cli: &Cli, path: &Path) -> CliResult<Vec<CommentRecord>> {
    let format = match cli.format {
        Some(FormatArg::Jsonl) => InputFormat::Jsonl,
        Some(FormatArg::Csv) => InputFormat::Csv,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        },
    };
    let map = FieldMap {
        timestamp_format: if cli.epoch_seconds {
            TimestampFormat::EpochSeconds
        } else {
            TimestampFormat::Rfc3339
        },
        ..FieldMap::default()
    };
    let outcome = ingest::parse_comments(open(path)?, format, &map)?;
    if outcome.skipped > 0 {
        log::warn!(
            "{}: skipped {} malformed rows",
            path.display(),
            outcome.skipped
        );
    }
    if outcome.records.is_empty() {
        return Err(input_error(format!(
            "no usable comments in {}",
            path.display()
        )));
    }
    Ok(outcome.records)
}

/// Split monthly buckets into the baseline period and the target months
/// after it. Months before the baseline are dropped with a warning.
fn split_corpus(
    buckets: BTreeMap<MonthKey, Vec<CommentRecord>>,
    start: MonthKey,
    end: MonthKey,
) -> CliResult<(Vec<CommentRecord>, BTreeMap<MonthKey, Vec<CommentRecord>>)> {
    let mut baseline = Vec::new();
    let mut targets = BTreeMap::new();
    for (month, comments) in buckets {
        if month < start {
            log::warn!(
                "dropping {} comments from {month}: before the baseline period",
                comments.len()
            );
        } else if month <= end {
            baseline.extend(comments);
        } else {
            targets.insert(month, comments);
        }
    }
    if baseline.is_empty() {
        return Err(input_error(format!(
            "no comments fall in the baseline period {start}..{end}"
        )));
    }
    if targets.is_empty() {
        return Err(input_error(format!(
            "no comments fall after the baseline period (ends {end})"
        )));
    }
    Ok((baseline, targets))
}

#[allow(clippy::type_complexity)]
fn build_model(
    cli: &Cli,
    input: &Path,
    resolved: &Resolved,
) -> CliResult<(WeirdnessModel, BTreeMap<MonthKey, Vec<CommentRecord>>)> {
    let records = read_corpus(cli, input)?;
    let buckets = ingest::bucket_by_month(records);
    let buckets = ingest::monthly_sample(buckets, resolved.monthly_sample, resolved.seed);
    let (start, end) = resolved.baseline_period()?;
    let (baseline, targets) = split_corpus(buckets, start, end)?;
    let model = weirdness::compute_model(&baseline, &targets, resolved.epsilon, resolved.min_count)?;
    Ok((model, targets))
}

fn csv_month_maps(
    header: [&str; 3],
    maps: &BTreeMap<MonthKey, BTreeMap<String, f64>>,
) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for (month, map) in maps {
            let m = month.to_string();
            for (word, value) in map {
                let v = value.to_string();
                w.write_record([m.as_str(), word.as_str(), v.as_str()])?;
            }
        }
        w.flush()?;
    }
    Ok(buf)
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut json = serde_json::to_vec_pretty(value).expect("value serializes");
    json.push(b'\n');
    json
}

pub fn stats(cli: &Cli, args: &StatsArgs) -> CliResult<()> {
    let (resolved, out_root) = resolve(cli, Some(&args.model))?;
    resolved.validate()?;
    let (model, _) = build_model(cli, &args.input, &resolved)?;
    let months: Vec<MonthKey> = model.months().collect();

    let mut words: Vec<String> = args.words.iter().map(|w| w.to_lowercase()).collect();
    words.sort();
    words.dedup();
    for word in &words {
        if !model.word_weirdness[&months[0]].contains_key(word) {
            return Err(input_error(format!(
                "word `{word}` is not in the model vocabulary \
                 (baseline count below {} or unseen)",
                resolved.min_count
            )));
        }
    }

    let mut command = format!("stats{}", corpus_flags(cli));
    for word in &words {
        command.push_str(&format!(" --word {word}"));
    }
    let mut run = RunDir::create(&out_root, &command, &resolved, &[&args.input])?;

    let mut buf = Vec::new();
    model.baseline.write_csv(&mut buf)?;
    run.write("freq_baseline.csv", &buf)?;
    for (month, table) in &model.monthly {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        run.write(&format!("freq_{month}.csv"), &buf)?;
    }

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["month", "vocab_size", "drift_indicator"])?;
        for month in &months {
            let m = month.to_string();
            let vocab = model.monthly[month].vocab_size().to_string();
            let drift = model.drift_indicator[month].to_string();
            w.write_record([m.as_str(), vocab.as_str(), drift.as_str()])?;
        }
        w.flush()?;
    }
    run.write("drift_indicator.csv", &buf)?;

    let x_labels: Vec<String> = months.iter().map(|m| m.to_string()).collect();
    let drift_series = Series {
        name: "drift indicator".into(),
        points: months.iter().map(|m| model.drift_indicator[m]).collect(),
    };
    let chart = svg::line_chart("Drift indicator", &x_labels, &[drift_series])?;
    run.write("drift_indicator.svg", chart.as_bytes())?;

    if !words.is_empty() {
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["month", "word", "weirdness"])?;
            for month in &months {
                let m = month.to_string();
                for word in &words {
                    let v = model.word_weirdness[month][word].to_string();
                    w.write_record([m.as_str(), word.as_str(), v.as_str()])?;
                }
            }
            w.flush()?;
        }
        run.write("word_trajectory.csv", &buf)?;

        let series: Vec<Series> = words
            .iter()
            .map(|word| Series {
                name: word.clone(),
                points: months
                    .iter()
                    .map(|m| model.word_weirdness[m][word])
                    .collect(),
            })
            .collect();
        let chart = svg::line_chart("Word weirdness", &x_labels, &series)?;
        run.write("word_trajectory.svg", chart.as_bytes())?;
    }

    let dir = run.finish()?;
    println!(
        "baseline: {} tokens, {} distinct words",
        model.baseline.total(),
        model.baseline.vocab_size()
    );
    for month in &months {
        println!("{month}  drift {:.6}", model.drift_indicator[month]);
    }
    println!("outputs: {}", dir.display());
    Ok(())
}

pub fn weirdness(cli: &Cli, args: &WeirdnessArgs) -> CliResult<()> {
    let (resolved, out_root) = resolve(cli, Some(&args.model))?;
    resolved.validate()?;
    let (model, targets) = build_model(cli, &args.input, &resolved)?;

    let oov = match args.oov_policy {
        OovPolicy::Skip => "skip",
        OovPolicy::TreatAsOne => "treat-as-one",
    };
    let avg = match args.averaging {
        Averaging::TokenOccurrences => "tokens",
        Averaging::UniqueTypes => "types",
    };
    let command = format!(
        "weirdness --oov-policy {oov} --averaging {avg}{}",
        corpus_flags(cli)
    );
    let mut run = RunDir::create(&out_root, &command, &resolved, &[&args.input])?;

    run.write(
        "word_weirdness.csv",
        &csv_month_maps(["month", "word", "weirdness"], &model.word_weirdness)?,
    )?;

    let mut pool_lines = Vec::new();
    for (month, comments) in &targets {
        let map = &model.word_weirdness[month];
        let mut defined = 0usize;
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["id", "weight"])?;
            for comment in comments {
                let weight = weirdness::comment_weirdness_with(
                    &comment.tokens,
                    map,
                    args.oov_policy,
                    args.averaging,
                );
                if weight.is_some() {
                    defined += 1;
                }
                let cell = weight.map(|v| v.to_string()).unwrap_or_default();
                w.write_record([comment.id.as_str(), cell.as_str()])?;
            }
            w.flush()?;
        }
        run.write(&format!("pool_{month}.csv"), &buf)?;
        pool_lines.push(format!(
            "{month}  pool {} comments ({} with defined weirdness)",
            comments.len(),
            defined
        ));
    }

    let dir = run.finish()?;
    for line in pool_lines {
        println!("{line}");
    }
    println!("outputs: {}", dir.display());
    Ok(())
}

/// A pool CSV needs an `id` column; the weight column (`weight` or
/// `weirdness`) is optional so a plain id list still supports random
/// sampling. Weight validation stays in [`SamplePool::new`].
fn read_pool(path: &Path, seed: u64) -> CliResult<SamplePool> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr
        .headers()
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id")
        .ok_or_else(|| input_error(format!("missing column `id` in {}", path.display())))?;
    let w_col = col("weight").or_else(|| col("weirdness"));

    let mut items = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(input_error(format!("{} row {row}: empty id", path.display())));
        }
        let weight = match w_col.map(|c| record.get(c).unwrap_or("")) {
            None | Some("") => None,
            Some(cell) => Some(cell.parse::<f64>().map_err(|_| {
                input_error(format!("{} row {row}: bad weight `{cell}`", path.display()))
            })?),
        };
        items.push(PoolItem { id, weight });
    }
    Ok(SamplePool::new(items, seed)?)
}

pub fn sample(cli: &Cli, args: &SampleArgs) -> CliResult<()> {
    let (mut resolved, out_root) = resolve(cli, None)?;
    if let Some(n) = args.sample_size {
        resolved.sample_size = n;
    }
    resolved.validate()?;

    let run_random = args.strategy.is_empty() || args.strategy.contains(&Strategy::Random);
    let run_weird = args.strategy.is_empty() || args.strategy.contains(&Strategy::Weirdness);
    let pool = read_pool(&args.pool, resolved.seed)?;

    let strategies = match (run_random, run_weird) {
        (true, true) => "random+weirdness",
        (true, false) => "random",
        (false, true) => "weirdness",
        (false, false) => unreachable!("clap rejects empty strategy values"),
    };
    let command = format!("sample --strategy {strategies}");
    let mut run = RunDir::create(&out_root, &command, &resolved, &[&args.pool])?;

    let n = resolved.sample_size;
    let id_lines = |ids: &[String]| {
        let mut text = String::new();
        for id in ids {
            text.push_str(id);
            text.push('\n');
        }
        text
    };

    let mut random_ids = None;
    if run_random {
        let ids = sampler::random_sample(&pool, n, resolved.seed);
        run.write("sample_random.txt", id_lines(&ids).as_bytes())?;
        println!("random: {} ids", ids.len());
        random_ids = Some(ids);
    }
    let mut weird_ids = None;
    if run_weird {
        let ids = sampler::weighted_sample(&pool, n, resolved.seed)?;
        run.write("sample_weirdness.txt", id_lines(&ids).as_bytes())?;
        let undefined = pool.undefined_ids();
        if undefined.is_empty() {
            println!("weirdness: {} ids", ids.len());
        } else {
            let mut text = String::new();
            for id in &undefined {
                text.push_str(id);
                text.push('\n');
            }
            run.write("undefined_ids.txt", text.as_bytes())?;
            println!(
                "weirdness: {} ids ({} pool items excluded: undefined weirdness)",
                ids.len(),
                undefined.len()
            );
        }
        weird_ids = Some(ids);
    }
    if let (Some(a), Some(b)) = (&random_ids, &weird_ids) {
        let report = sampler::overlap_report(a, b);
        run.write("overlap.json", &pretty_json(&report))?;
        println!("overlap: {} ids", report.count);
    }

    let dir = run.finish()?;
    println!("outputs: {}", dir.display());
    Ok(())
}

/// The weirdness column of a pool or evaluation CSV: `weight` or `weirdness`,
/// empty cells and non-finite values meaning undefined.
fn read_weight_map(path: &Path) -> CliResult<BTreeMap<String, Option<f64>>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr
        .headers()
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id")
        .ok_or_else(|| input_error(format!("missing column `id` in {}", path.display())))?;
    let w_col = col("weight").or_else(|| col("weirdness")).ok_or_else(|| {
        input_error(format!(
            "missing column `weight` or `weirdness` in {}",
            path.display()
        ))
    })?;

    let mut out = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(input_error(format!("{} row {row}: empty id", path.display())));
        }
        let cell = record.get(w_col).unwrap_or("");
        let weight = if cell.is_empty() {
            None
        } else {
            let value: f64 = cell.parse().map_err(|_| {
                input_error(format!(
                    "{} row {row}: bad weirdness `{cell}`",
                    path.display()
                ))
            })?;
            if value.is_finite() {
                Some(value)
            } else {
                log::warn!("{} row {row}: non-finite weirdness treated as undefined", path.display());
                None
            }
        };
        if out.insert(id.clone(), weight).is_some() {
            return Err(input_error(format!(
                "{}: duplicate id `{id}`",
                path.display()
            )));
        }
    }
    Ok(out)
}

pub fn evaluate(cli: &Cli, args: &EvaluateArgs) -> CliResult<()> {
    let (mut resolved, out_root) = resolve(cli, None)?;
    if let Some(v) = args.threshold_low {
        resolved.threshold_low = v;
    }
    if let Some(v) = args.threshold_high {
        resolved.threshold_high = v;
    }
    resolved.validate()?;
    let (low, high) = (resolved.threshold_low, resolved.threshold_high);

    let gold = evaluate::read_gold(open(&args.gold)?)?;
    if gold.is_empty() {
        return Err(input_error(format!(
            "no gold records in {}",
            args.gold.display()
        )));
    }

    let mut models: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for path in &args.predictions {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| {
                input_error(format!("cannot derive a model name from {}", path.display()))
            })?
            .to_string();
        let preds = evaluate::read_predictions(open(path)?)?;
        if models.insert(name.clone(), preds).is_some() {
            return Err(input_error(format!(
                "two prediction files share the model name `{name}`"
            )));
        }
    }

    let gold_ids: BTreeSet<&String> = gold.keys().collect();
    for (name, preds) in &models {
        let ids: BTreeSet<&String> = preds.keys().collect();
        if ids != gold_ids {
            let missing: Vec<String> = gold_ids
                .symmetric_difference(&ids)
                .map(|s| s.to_string())
                .collect();
            return Err(input_error(format!(
                "model `{name}` and the gold file cover different ids: {}",
                driftmon::Error::IdMismatch { missing }
            )));
        }
    }

    let weirdness_map = match &args.weirdness {
        Some(path) => read_weight_map(path)?,
        None => BTreeMap::new(),
    };

    let a1: Vec<Label> = gold.values().map(|r| r.annotator1).collect();
    let a2: Vec<Label> = gold.values().map(|r| r.annotator2).collect();
    let kappa = evaluate::cohens_kappa(&a1, &a2)?;

    let table = evaluate::confidence_table(&models, &weirdness_map, low, high)?;

    let slices: [(&str, String); 4] = [
        ("all", "all test data".into()),
        ("low", format!("weirdness < {low}")),
        ("band", format!("weirdness {low}-{high}")),
        ("high", format!("weirdness > {high}")),
    ];
    let mut reports: BTreeMap<&str, Vec<(String, EvalReport)>> = BTreeMap::new();
    let mut slice_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (name, preds) in &models {
        let records: Vec<EvalRecord> = preds
            .iter()
            .map(|(id, &prob)| EvalRecord {
                id: id.clone(),
                gold: gold[id].final_label,
                prob,
                weirdness: weirdness_map.get(id).copied().flatten(),
            })
            .collect();
        let picks: [(&str, Vec<&EvalRecord>); 4] = [
            ("all", records.iter().collect()),
            ("low", evaluate::slice_by_weirdness(&records, SliceOp::Lt, low)),
            ("band", evaluate::slice_band(&records, low, high)),
            ("high", evaluate::slice_by_weirdness(&records, SliceOp::Gt, high)),
        ];
        for (key, refs) in picks {
            slice_counts.insert(key, refs.len());
            if refs.is_empty() {
                continue;
            }
            let report = evaluate::evaluate_records(&refs, Some(key.to_string()))?;
            reports.entry(key).or_default().push((name.clone(), report));
        }
    }

    let mut inputs: Vec<&Path> = vec![args.gold.as_path()];
    inputs.extend(args.predictions.iter().map(|p| p.as_path()));
    if let Some(p) = &args.weirdness {
        inputs.push(p.as_path());
    }
    let mut run = RunDir::create(&out_root, "evaluate", &resolved, &inputs)?;

    let mut text = format!("Cohen's kappa (annotator agreement): {kappa:.2}\n\n");
    text.push_str(&evaluate::render_confidence_table(&table));
    for (key, title) in &slices {
        text.push('\n');
        match reports.get(key) {
            Some(models) => text.push_str(&evaluate::render_model_table(
                &format!("Model performance, {title}"),
                models,
            )),
            None => text.push_str(&format!(
                "Model performance, {title}\n(no records in this slice)\n"
            )),
        }
    }
    run.write("report.txt", text.as_bytes())?;

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([
            "model",
            "slice",
            "class",
            "support",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "mean_confidence",
        ])?;
        for (key, _) in &slices {
            let Some(models) = reports.get(key) else {
                continue;
            };
            for (name, report) in models {
                let support = report.support.to_string();
                let accuracy = report.accuracy.to_string();
                let conf = report
                    .mean_confidence
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                let named = report
                    .per_class
                    .iter()
                    .map(|(label, m)| (label.short_name(), m))
                    .chain([("macro", &report.macro_avg), ("weighted", &report.weighted_avg)]);
                for (class, m) in named {
                    let p = m.precision.to_string();
                    let r = m.recall.to_string();
                    let f = m.f1.to_string();
                    w.write_record([
                        name.as_str(),
                        key,
                        class,
                        support.as_str(),
                        accuracy.as_str(),
                        p.as_str(),
                        r.as_str(),
                        f.as_str(),
                        conf.as_str(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    run.write("report.csv", &buf)?;

    let mut buf = Vec::new();
    {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["model", "weird_low", "all", "weird_high", "band"])?;
        for (name, row) in &table.rows {
            let cells = [
                opt(row.low),
                row.all.to_string(),
                opt(row.high),
                opt(row.band),
            ];
            w.write_record([
                name.as_str(),
                cells[0].as_str(),
                cells[1].as_str(),
                cells[2].as_str(),
                cells[3].as_str(),
            ])?;
        }
        w.flush()?;
    }
    run.write("confidence.csv", &buf)?;

    let summary = serde_json::json!({
        "kappa": kappa,
        "models": models.keys().collect::<Vec<_>>(),
        "records": gold.len(),
        "undefined_weirdness": table.undefined_weirdness,
        "threshold_low": low,
        "threshold_high": high,
        "slice_counts": slice_counts,
    });
    run.write("summary.json", &pretty_json(&summary))?;

    let dir = run.finish()?;
    println!("kappa: {kappa:.4} over {} records", gold.len());
    if let Some(all) = reports.get("all") {
        for (name, report) in all {
            println!(
                "{name}: accuracy {:.4}, mean confidence {:.4}",
                report.accuracy,
                report.mean_confidence.unwrap_or(f64::NAN)
            );
        }
    }
    println!("outputs: {}", dir.display());
    Ok(())
}

pub fn simulate(cli: &Cli, args: &SimulateArgs) -> CliResult<()> {
    let (mut resolved, out_root) = resolve(cli, None)?;
    let mut spec = DriftSpec::from_reader(open(&args.spec)?)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    resolved.seed = spec.seed;
    resolved.validate()?;

    let corpus = driftgen::generate_corpus(&spec)?;
    let mut run = RunDir::create(&out_root, "simulate", &resolved, &[&args.spec])?;

    let mut buf = Vec::new();
    ingest::write_jsonl(&corpus.baseline, &mut buf)?;
    for comments in corpus.months.values() {
        ingest::write_jsonl(comments, &mut buf)?;
    }
    run.write("corpus.jsonl", &buf)?;

    run.write(
        "expected_weirdness.csv",
        &csv_month_maps(["month", "word", "weirdness"], &corpus.expected_weirdness)?,
    )?;

    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["month", "expected_drift_indicator"])?;
        for month in spec.months() {
            let m = month.to_string();
            let d = driftgen::expected_drift_indicator(&spec, month)?.to_string();
            w.write_record([m.as_str(), d.as_str()])?;
        }
        w.flush()?;
    }
    run.write("expected_drift.csv", &buf)?;

    let dir = run.finish()?;
    let (start, end) = spec.baseline_period();
    println!(
        "baseline {start}..{end}: {} comments; {} target months x {} comments",
        corpus.baseline.len(),
        corpus.months.len(),
        spec.comments_per_month
    );
    println!("outputs: {}", dir.display());
    Ok(())
}

pub fn filter(cli: &Cli, args: &FilterArgs) -> CliResult<()> {
    let (resolved, out_root) = resolve(cli, None)?;
    resolved.validate()?;
    let records = read_corpus(cli, &args.input)?;
    let keywords = ingest::KeywordList::from_reader(open(&args.keywords)?)?;
    let mode = if args.exact {
        MatchMode::Exact
    } else {
        MatchMode::Prefix
    };
    let outcome = ingest::keyword_filter(records, &keywords, mode);

    let command = format!(
        "filter --match {}{}",
        if args.exact { "exact" } else { "prefix" },
        corpus_flags(cli)
    );
    let mut run = RunDir::create(
        &out_root,
        &command,
        &resolved,
        &[&args.input, &args.keywords],
    )?;
    let mut buf = Vec::new();
    ingest::write_jsonl(&outcome.retained, &mut buf)?;
    run.write("retained.jsonl", &buf)?;
    let mut buf = Vec::new();
    ingest::write_jsonl(&outcome.removed, &mut buf)?;
    run.write("removed.jsonl", &buf)?;
    run.write("filter_stats.json", &pretty_json(&outcome.stats))?;

    let dir = run.finish()?;
    println!(
        "retained {} of {} comments (removed fraction {:.4})",
        outcome.stats.retained,
        outcome.stats.retained + outcome.stats.removed,
        outcome.stats.removed_fraction
    );
    println!("outputs: {}", dir.display());
    Ok(())
}
