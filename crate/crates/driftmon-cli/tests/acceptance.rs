//! Acceptance gate: one test per shipping criterion, each printing a single
//! PASS/FAIL line. Tolerances and time limits are pinned here.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use driftmon::driftgen::{self, DriftSpec, TokensPerComment};
use driftmon::evaluate;
use driftmon::sampler::{self, PoolItem, SamplePool};
use driftmon::weirdness;
use driftmon::{Label, MonthKey};

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

/// Print the verdict directly to stdout (bypassing test capture) and panic
/// on failure so the criterion also fails the test run.
fn report<F>(num: u8, name: &str, body: F)
where
    F: FnOnce() -> Result<(), String>,
{
    let verdict = body();
    let line = match &verdict {
        Ok(()) => format!("acceptance {num:02} {name}: PASS\n"),
        Err(msg) => format!("acceptance {num:02} {name}: FAIL ({msg})\n"),
    };
    let _ = std::io::stdout().write_all(line.as_bytes());
    if let Err(msg) = verdict {
        panic!("acceptance {num:02} {name}: {msg}");
    }
}

fn mk(year: i32, month: u32) -> MonthKey {
    MonthKey::new(year, month).unwrap()
}

fn driftmon_bin(dir: &Path, args: &[&str]) -> Result<(String, PathBuf), String> {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_driftmon"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| format!("cannot spawn binary: {e}"))?;
    ensure!(
        out.status.success(),
        "driftmon {args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let run_dir = stdout
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("outputs: "))
        .ok_or("missing `outputs:` line")?
        .to_string();
    Ok((stdout, dir.join(run_dir)))
}

fn labels_from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<Label>, Vec<Label>) {
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for _ in 0..tp {
        gold.push(Label::AntiVax);
        pred.push(Label::AntiVax);
    }
    for _ in 0..fp {
        gold.push(Label::Other);
        pred.push(Label::AntiVax);
    }
    for _ in 0..fn_ {
        gold.push(Label::AntiVax);
        pred.push(Label::Other);
    }
    for _ in 0..tn {
        gold.push(Label::Other);
        pred.push(Label::Other);
    }
    (gold, pred)
}

#[test]
fn criterion_01_identity_weirdness() {
    report(1, "identity weirdness", || {
        let start = Instant::now();
        let spec = DriftSpec {
            vocabulary: ["olt", "vakcina", "hir", "nap", "viz", "sor"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            baseline_probs: vec![0.3, 0.25, 0.15, 0.15, 0.1, 0.05],
            monthly_multipliers: BTreeMap::from([(mk(2021, 3), BTreeMap::new())]),
            comments_per_month: 4_000,
            baseline_comments: Some(4_000),
            baseline_start: None,
            baseline_end: None,
            tokens_per_comment: TokensPerComment::Fixed(8),
            seed: 11,
        };
        spec.validate().map_err(|e| e.to_string())?;

        let expected = spec.expected_weirdness(mk(2021, 3)).map_err(|e| e.to_string())?;
        for (word, w) in &expected {
            ensure!((w - 1.0).abs() <= 1e-12, "analytic weirdness({word}) = {w}");
        }
        let drift = driftgen::expected_drift_indicator(&spec, mk(2021, 3))
            .map_err(|e| e.to_string())?;
        ensure!(drift.abs() <= 1e-12, "analytic drift = {drift}");

        let corpus = driftgen::generate_corpus(&spec).map_err(|e| e.to_string())?;
        let month_comments = corpus.months[&mk(2021, 3)].clone();
        let months = BTreeMap::from([(mk(2021, 3), month_comments.clone())]);
        for epsilon in [0.0, weirdness::DEFAULT_EPSILON] {
            let model = weirdness::compute_model(&month_comments, &months, epsilon, 1)
                .map_err(|e| e.to_string())?;
            for (word, w) in &model.word_weirdness[&mk(2021, 3)] {
                ensure!(
                    (w - 1.0).abs() <= 1e-12,
                    "weirdness({word}) = {w} at epsilon {epsilon}"
                );
            }
            let drift = model.drift_indicator[&mk(2021, 3)];
            ensure!(drift.abs() <= 1e-12, "drift = {drift} at epsilon {epsilon}");
        }
        ensure!(
            start.elapsed() < Duration::from_secs(5),
            "took {:?}",
            start.elapsed()
        );
        Ok(())
    });
}

#[test]
fn criterion_02_weirdness_conservation() {
    report(2, "weirdness conservation", || {
        let start = Instant::now();
        let all_words = [
            "olt", "vakcina", "hir", "nap", "viz", "sor", "fa", "nem", "jo", "rossz",
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for case in 0..100u64 {
            let v = rng.random_range(3..=8);
            let vocabulary: Vec<String> = all_words[..v].iter().map(|s| s.to_string()).collect();
            let mut probs: Vec<f64> = (0..v).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = probs.iter().sum();
            for p in &mut probs {
                *p /= total;
            }
            let mut mults = BTreeMap::new();
            for word in &vocabulary {
                if rng.random::<bool>() {
                    mults.insert(word.clone(), rng.random_range(0.3..3.0));
                }
            }
            let spec = DriftSpec {
                vocabulary,
                baseline_probs: probs,
                monthly_multipliers: BTreeMap::from([(mk(2021, 3), mults)]),
                comments_per_month: rng.random_range(300..=800),
                baseline_comments: Some(rng.random_range(2_000..=3_000)),
                baseline_start: None,
                baseline_end: None,
                tokens_per_comment: TokensPerComment::Fixed(6),
                seed: 10_000 + case,
            };
            spec.validate().map_err(|e| e.to_string())?;
            let corpus = driftgen::generate_corpus(&spec).map_err(|e| e.to_string())?;
            let model = weirdness::compute_model(&corpus.baseline, &corpus.months, 0.0, 1)
                .map_err(|e| e.to_string())?;
            for (month, table) in &model.monthly {
                for (word, _) in table.iter() {
                    ensure!(
                        model.baseline.contains(word),
                        "case {case}: month word `{word}` missing from baseline"
                    );
                }
                let t_b = model.baseline.total() as f64;
                let sum: f64 = model.word_weirdness[month]
                    .iter()
                    .map(|(word, w)| (model.baseline.count(word) as f64 / t_b) * w)
                    .sum();
                ensure!(
                    (sum - 1.0).abs() <= 1e-9,
                    "case {case} month {month}: conservation sum = {sum}"
                );
            }
        }
        ensure!(
            start.elapsed() < Duration::from_secs(30),
            "took {:?}",
            start.elapsed()
        );
        Ok(())
    });
}

#[test]
fn criterion_03_analytic_convergence() {
    report(3, "analytic convergence", || {
        let start = Instant::now();
        let spec = DriftSpec {
            vocabulary: vec!["olt".into(), "vakcina".into()],
            baseline_probs: vec![0.5, 0.5],
            monthly_multipliers: BTreeMap::from([(
                mk(2021, 3),
                BTreeMap::from([("olt".to_string(), 3.0)]),
            )]),
            comments_per_month: 40_000,
            baseline_comments: Some(40_000),
            baseline_start: None,
            baseline_end: None,
            tokens_per_comment: TokensPerComment::Fixed(10),
            seed: 314,
        };
        let expected = spec.expected_weirdness(mk(2021, 3)).map_err(|e| e.to_string())?;
        ensure!(
            (expected["olt"] - 1.5).abs() <= 1e-12 && (expected["vakcina"] - 0.5).abs() <= 1e-12,
            "analytic oracle should be exactly (1.5, 0.5), got ({}, {})",
            expected["olt"],
            expected["vakcina"]
        );
        let corpus = driftgen::generate_corpus(&spec).map_err(|e| e.to_string())?;
        let model = weirdness::compute_model(&corpus.baseline, &corpus.months, 0.0, 1)
            .map_err(|e| e.to_string())?;
        let map = &model.word_weirdness[&mk(2021, 3)];
        ensure!(
            (map["olt"] - 1.5).abs() <= 0.05,
            "weirdness(olt) = {} not within 0.05 of 1.5",
            map["olt"]
        );
        ensure!(
            (map["vakcina"] - 0.5).abs() <= 0.05,
            "weirdness(vakcina) = {} not within 0.05 of 0.5",
            map["vakcina"]
        );
        ensure!(
            start.elapsed() < Duration::from_secs(10),
            "took {:?}",
            start.elapsed()
        );
        Ok(())
    });
}

#[test]
fn criterion_04_drift_spike_end_to_end() {
    report(4, "drift spike end to end", || {
        let start = Instant::now();
        let schedule = [1.1, 1.2, 1.3, 3.0, 1.25, 1.15];
        let mut monthly_multipliers = BTreeMap::new();
        for (i, mult) in schedule.iter().enumerate() {
            monthly_multipliers.insert(
                mk(2021, 3 + i as u32),
                BTreeMap::from([("olt".to_string(), *mult)]),
            );
        }
        let spec = DriftSpec {
            vocabulary: ["olt", "vakcina", "hir", "nap", "viz", "sor"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            baseline_probs: vec![0.3, 0.25, 0.15, 0.15, 0.1, 0.05],
            monthly_multipliers,
            comments_per_month: 6_000,
            baseline_comments: Some(12_000),
            baseline_start: Some(mk(2021, 1)),
            baseline_end: Some(mk(2021, 2)),
            tokens_per_comment: TokensPerComment::Fixed(8),
            seed: 2_021,
        };
        let spike_month = mk(2021, 6);
        let analytic_max = spec
            .months()
            .map(|m| {
                (
                    m,
                    driftgen::expected_drift_indicator(&spec, m).expect("valid month"),
                )
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(m, _)| m);
        ensure!(
            analytic_max == Some(spike_month),
            "analytic oracle peaks at {analytic_max:?}, not the spike month"
        );

        let tmp = TempDir::new().map_err(|e| e.to_string())?;
        let dir = tmp.path();
        spec.to_writer(fs::File::create(dir.join("spec.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let (_, sim_dir) = driftmon_bin(dir, &["simulate", "spec.json", "--out", "runs"])?;
        let corpus = sim_dir.join("corpus.jsonl");
        let (_, stats_dir) = driftmon_bin(
            dir,
            &[
                "stats",
                corpus.to_str().unwrap(),
                "--baseline-start",
                "2021-01",
                "--baseline-end",
                "2021-02",
                "--min-count",
                "1",
                "--out",
                "runs",
            ],
        )?;
        let csv = fs::read_to_string(stats_dir.join("drift_indicator.csv"))
            .map_err(|e| e.to_string())?;
        let mut series = Vec::new();
        for line in csv.lines().skip(1) {
            let mut cells = line.split(',');
            let month = cells.next().ok_or("missing month cell")?.to_string();
            let drift: f64 = cells
                .nth(1)
                .ok_or("missing drift cell")?
                .parse()
                .map_err(|e| format!("bad drift value: {e}"))?;
            series.push((month, drift));
        }
        ensure!(series.len() == 6, "expected 6 month rows, got {}", series.len());
        let max = series
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty series");
        ensure!(
            max.0 == spike_month.to_string(),
            "drift series peaks at {} (value {}), expected {spike_month}",
            max.0,
            max.1
        );
        ensure!(
            start.elapsed() < Duration::from_secs(30),
            "took {:?}",
            start.elapsed()
        );
        Ok(())
    });
}

#[test]
fn criterion_05_weighted_sampling_frequencies() {
    report(5, "weighted sampling frequencies", || {
        let start = Instant::now();
        let pool = SamplePool::new(
            vec![
                PoolItem { id: "a".into(), weight: Some(1.0) },
                PoolItem { id: "b".into(), weight: Some(2.0) },
                PoolItem { id: "c".into(), weight: Some(7.0) },
            ],
            0,
        )
        .map_err(|e| e.to_string())?;
        let draws = 100_000u64;
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for seed in 0..draws {
            let picked = sampler::weighted_sample(&pool, 1, seed).map_err(|e| e.to_string())?;
            *counts.entry(picked[0].clone()).or_default() += 1;
        }
        for (id, expected) in [("a", 0.1), ("b", 0.2), ("c", 0.7)] {
            let freq = counts.get(id).copied().unwrap_or(0) as f64 / draws as f64;
            ensure!(
                (freq - expected).abs() <= 0.01,
                "freq({id}) = {freq}, expected {expected} ± 0.01"
            );
        }
        ensure!(
            start.elapsed() < Duration::from_secs(20),
            "took {:?}",
            start.elapsed()
        );
        Ok(())
    });
}

#[test]
fn criterion_06_two_sample_workflow() {
    report(6, "two-sample workflow", || {
        let tmp = TempDir::new().map_err(|e| e.to_string())?;
        let dir = tmp.path();
        let mut pool = String::from("id,weight\n");
        for i in 0..4_500u32 {
            let weight = 0.2 + f64::from((i * 37) % 997) / 997.0 * 3.0;
            pool.push_str(&format!("p{i:04},{weight}\n"));
        }
        fs::write(dir.join("pool.csv"), &pool).map_err(|e| e.to_string())?;

        let args = [
            "sample", "pool.csv", "-n", "1500", "--seed", "42", "--out",
        ];
        let mut snapshots = Vec::new();
        for out in ["a", "b"] {
            let mut full = args.to_vec();
            full.push(out);
            let (_, run_dir) = driftmon_bin(dir, &full)?;
            let mut files = BTreeMap::new();
            for entry in fs::read_dir(&run_dir).map_err(|e| e.to_string())? {
                let path = entry.map_err(|e| e.to_string())?.path();
                files.insert(
                    path.file_name().unwrap().to_str().unwrap().to_string(),
                    fs::read(&path).map_err(|e| e.to_string())?,
                );
            }
            snapshots.push(files);
        }
        ensure!(
            snapshots[0] == snapshots[1],
            "same-seed rerun is not byte-identical"
        );

        let files = &snapshots[0];
        for name in ["sample_random.txt", "sample_weirdness.txt", "overlap.json", "manifest.json"] {
            ensure!(files.contains_key(name), "missing output {name}");
        }
        let random: BTreeSet<&str> = std::str::from_utf8(&files["sample_random.txt"])
            .map_err(|e| e.to_string())?
            .lines()
            .collect();
        let weird: BTreeSet<&str> = std::str::from_utf8(&files["sample_weirdness.txt"])
            .map_err(|e| e.to_string())?
            .lines()
            .collect();
        ensure!(random.len() == 1_500, "random sample has {} ids", random.len());
        ensure!(weird.len() == 1_500, "weighted sample has {} ids", weird.len());
        let overlap: serde_json::Value =
            serde_json::from_slice(&files["overlap.json"]).map_err(|e| e.to_string())?;
        let expected = random.intersection(&weird).count() as u64;
        ensure!(
            overlap["count"].as_u64() == Some(expected),
            "overlap report says {}, recount gives {expected}",
            overlap["count"]
        );
        Ok(())
    });
}

#[test]
fn criterion_07_metric_exactness() {
    report(7, "metric exactness", || {
        let (gold, pred) = labels_from_counts(50, 20, 30, 100);
        let report = evaluate::confusion_metrics(&gold, &pred).map_err(|e| e.to_string())?;

        let p_av = 50.0 / 70.0;
        let r_av = 50.0 / 80.0;
        let f_av = 2.0 * p_av * r_av / (p_av + r_av);
        let p_ot = 100.0 / 130.0;
        let r_ot = 100.0 / 120.0;
        let f_ot = 2.0 * p_ot * r_ot / (p_ot + r_ot);
        let accuracy = 150.0 / 200.0;
        let anti = report.class_metrics(Label::AntiVax);
        let other = report.class_metrics(Label::Other);
        let checks = [
            ("accuracy", report.accuracy, accuracy),
            ("antivax precision", anti.precision, p_av),
            ("antivax recall", anti.recall, r_av),
            ("antivax f1", anti.f1, f_av),
            ("other precision", other.precision, p_ot),
            ("other recall", other.recall, r_ot),
            ("other f1", other.f1, f_ot),
            ("macro f1", report.macro_avg.f1, (f_av + f_ot) / 2.0),
            (
                "weighted recall",
                report.weighted_avg.recall,
                (80.0 * r_av + 120.0 * r_ot) / 200.0,
            ),
        ];
        for (what, got, want) in checks {
            ensure!(
                (got - want).abs() <= 1e-12,
                "{what} = {got}, hand oracle {want}"
            );
        }

        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for _ in 0..1_000 {
            let n = rng.random_range(2..=40);
            let flip = |r: &mut ChaCha8Rng| {
                if r.random::<bool>() {
                    Label::AntiVax
                } else {
                    Label::Other
                }
            };
            let gold: Vec<Label> = (0..n).map(|_| flip(&mut rng)).collect();
            let pred: Vec<Label> = (0..n).map(|_| flip(&mut rng)).collect();
            let report = evaluate::confusion_metrics(&gold, &pred).map_err(|e| e.to_string())?;
            ensure!(
                (report.accuracy - report.weighted_avg.recall).abs() <= 1e-12,
                "accuracy {} != weighted recall {}",
                report.accuracy,
                report.weighted_avg.recall
            );
        }
        Ok(())
    });
}

#[test]
fn criterion_08_report_table_rendering() {
    report(8, "table rendering", || {
        let (gold, pred) = labels_from_counts(59, 41, 75, 115);
        let model_report = evaluate::confusion_metrics(&gold, &pred).map_err(|e| e.to_string())?;
        let rendered = evaluate::render_model_table(
            "Model performance, all test data",
            &[("Base model".to_string(), model_report)],
        );
        ensure!(
            rendered.contains("Model  Class  Accuracy  f1-score  Precision  Recall"),
            "model table header missing:\n{rendered}"
        );
        ensure!(
            rendered.contains("Base model  Anti-vaxxer  0.60  0.50  0.59  0.44"),
            "expected the 0.60  0.50  0.59  0.44 row:\n{rendered}"
        );

        let mut preds = BTreeMap::new();
        let mut weird = BTreeMap::new();
        for i in 0..70 {
            let (prob, w) = match i {
                0..=9 => (0.89, 0.5),
                10..=59 => (0.642, 1.0),
                _ => (0.34, 1.5),
            };
            preds.insert(format!("c{i:03}"), prob);
            weird.insert(format!("c{i:03}"), Some(w));
        }
        let models = BTreeMap::from([("Base model".to_string(), preds)]);
        let table =
            evaluate::confidence_table(&models, &weird, 0.9, 1.2).map_err(|e| e.to_string())?;
        let rendered = evaluate::render_confidence_table(&table);
        ensure!(
            rendered.contains("Model  Weird<0.9  All test data  Weird>1.2"),
            "confidence header missing:\n{rendered}"
        );
        ensure!(
            rendered.contains("Base model  0.39  0.18  0.16"),
            "expected the 0.39/0.18/0.16 row:\n{rendered}"
        );
        Ok(())
    });
}

#[test]
fn criterion_09_kappa_oracle() {
    report(9, "kappa oracle", || {
        use Label::{AntiVax as X, Other as Y};
        let kappa =
            evaluate::cohens_kappa(&[X, X, Y, Y], &[X, Y, X, Y]).map_err(|e| e.to_string())?;
        ensure!(kappa.abs() <= 1e-12, "independent halves give kappa {kappa}");

        let same = [X, Y, Y, X, X, X, Y];
        let kappa = evaluate::cohens_kappa(&same, &same).map_err(|e| e.to_string())?;
        ensure!((kappa - 1.0).abs() <= 1e-12, "identical sequences give {kappa}");

        let mut a = Vec::new();
        let mut b = Vec::new();
        for (count, pair) in [(20, (X, X)), (5, (X, Y)), (10, (Y, X)), (15, (Y, Y))] {
            for _ in 0..count {
                a.push(pair.0);
                b.push(pair.1);
            }
        }
        let p_o = 35.0 / 50.0;
        let p_e = (25.0 / 50.0) * (30.0 / 50.0) + (25.0 / 50.0) * (20.0 / 50.0);
        let hand = (p_o - p_e) / (1.0 - p_e);
        let kappa = evaluate::cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
        ensure!(
            (kappa - hand).abs() <= 1e-12,
            "2x2 fixture: kappa {kappa} vs hand {hand}"
        );
        ensure!((hand - 0.4).abs() <= 1e-12, "hand computation drifted: {hand}");
        Ok(())
    });
}

#[test]
fn criterion_10_throughput_million_comments() {
    report(10, "million-comment throughput", || {
        let vocab_size = 120usize;
        let vocabulary: Vec<String> = (0..vocab_size).map(|i| format!("w{i:03}")).collect();
        let mut probs: Vec<f64> = (0..vocab_size).map(|i| 1.0 / (i + 1) as f64).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        let mut monthly_multipliers = BTreeMap::new();
        for m in 0..3u32 {
            monthly_multipliers.insert(
                mk(2021, 3 + m),
                BTreeMap::from([("w000".to_string(), 1.0 + f64::from(m) * 0.4)]),
            );
        }
        let spec = DriftSpec {
            vocabulary,
            baseline_probs: probs,
            monthly_multipliers,
            comments_per_month: 200_000,
            baseline_comments: Some(400_000),
            baseline_start: None,
            baseline_end: None,
            tokens_per_comment: TokensPerComment::Fixed(10),
            seed: 1_000_000,
        };
        spec.validate().map_err(|e| e.to_string())?;

        let start = Instant::now();
        let corpus = driftgen::generate_corpus(&spec).map_err(|e| e.to_string())?;
        let n_comments =
            corpus.baseline.len() + corpus.months.values().map(Vec::len).sum::<usize>();
        ensure!(n_comments == 1_000_000, "generated {n_comments} comments");
        let model = weirdness::compute_model(
            &corpus.baseline,
            &corpus.months,
            weirdness::DEFAULT_EPSILON,
            weirdness::DEFAULT_MIN_BASELINE_COUNT,
        )
        .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure!(
            model.baseline.total() == 4_000_000 && model.monthly.len() == 3,
            "unexpected model shape"
        );
        ensure!(
            elapsed < Duration::from_secs(60),
            "generation + counting + weirdness took {elapsed:?}"
        );

        let status = fs::read_to_string("/proc/self/status").map_err(|e| e.to_string())?;
        let hwm_kb: u64 = status
            .lines()
            .find_map(|l| l.strip_prefix("VmHWM:"))
            .and_then(|l| l.trim().trim_end_matches("kB").trim().parse().ok())
            .ok_or("cannot read VmHWM")?;
        ensure!(
            hwm_kb < 2 * 1024 * 1024,
            "peak memory {hwm_kb} kB exceeds 2 GB"
        );
        Ok(())
    });
}

#[test]
fn criterion_11_keyword_filter_proportion() {
    report(11, "keyword filter proportion", || {
        let tmp = TempDir::new().map_err(|e| e.to_string())?;
        let dir = tmp.path();
        let mut corpus = String::new();
        for i in 0..1_000 {
            let text = if i % 40 < 29 { "oltas hir ma" } else { "nap viz ma" };
            corpus.push_str(&format!(
                "{{\"id\":\"c{i:04}\",\"ts\":\"2021-03-05T00:00:00Z\",\"text\":\"{text}\"}}\n"
            ));
        }
        fs::write(dir.join("corpus.jsonl"), &corpus).map_err(|e| e.to_string())?;
        fs::write(dir.join("kw.txt"), "olt\n").map_err(|e| e.to_string())?;

        let (_, run_dir) = driftmon_bin(
            dir,
            &[
                "filter",
                "corpus.jsonl",
                "--keywords",
                "kw.txt",
                "--out",
                "runs",
            ],
        )?;
        let stats: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(run_dir.join("filter_stats.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        ensure!(
            stats["retained"].as_u64() == Some(725) && stats["removed"].as_u64() == Some(275),
            "partition counts off: {stats}"
        );
        let fraction = stats["removed_fraction"].as_f64().ok_or("missing fraction")?;
        ensure!(
            (fraction - 0.275).abs() <= 1e-12,
            "removed_fraction = {fraction}"
        );
        let retained = fs::read_to_string(run_dir.join("retained.jsonl")).map_err(|e| e.to_string())?;
        let removed = fs::read_to_string(run_dir.join("removed.jsonl")).map_err(|e| e.to_string())?;
        ensure!(
            retained.lines().count() == 725 && removed.lines().count() == 275,
            "output files disagree with the stats"
        );
        Ok(())
    });
}
