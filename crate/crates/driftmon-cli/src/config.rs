//! Config-file merging, the run-stamped output directory and its manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use driftmon::MonthKey;

use crate::{input_error, CliResult};

/// Optional JSON config; any command-line flag overrides its field.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub baseline_start: Option<MonthKey>,
    pub baseline_end: Option<MonthKey>,
    pub monthly_sample: Option<usize>,
    pub epsilon: Option<f64>,
    pub min_count: Option<u64>,
    pub threshold_low: Option<f64>,
    pub threshold_high: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sample_size: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let file = File::open(path)
                    .map_err(|e| input_error(format!("cannot open config {}: {e}", path.display())))?;
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| input_error(format!("bad config {}: {e}", path.display())))
            }
        }
    }
}

/// Fully resolved settings for one run; hashed into the run id and recorded
/// in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub baseline_start: Option<MonthKey>,
    pub baseline_end: Option<MonthKey>,
    pub monthly_sample: usize,
    pub epsilon: f64,
    pub min_count: u64,
    pub threshold_low: f64,
    pub threshold_high: f64,
    pub seed: u64,
    pub sample_size: usize,
}

pub const DEFAULT_MONTHLY_SAMPLE: usize = 40_000;
pub const DEFAULT_SAMPLE_SIZE: usize = 1_500;
pub const DEFAULT_THRESHOLD_LOW: f64 = 0.9;
pub const DEFAULT_THRESHOLD_HIGH: f64 = 1.2;

impl Resolved {
    pub fn validate(&self) -> CliResult<()> {
        if let (Some(start), Some(end)) = (self.baseline_start, self.baseline_end) {
            if end < start {
                return Err(input_error(format!(
                    "baseline end {end} is before baseline start {start}"
                )));
            }
        }
        if self.monthly_sample == 0 {
            return Err(input_error("monthly sample size must be ≥ 1"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(input_error(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.threshold_low > self.threshold_high {
            return Err(input_error(format!(
                "threshold-low {} exceeds threshold-high {}",
                self.threshold_low, self.threshold_high
            )));
        }
        Ok(())
    }

    /// The two resolved baseline months, required by the stats commands.
    pub fn baseline_period(&self) -> CliResult<(MonthKey, MonthKey)> {
        match (self.baseline_start, self.baseline_end) {
            (Some(s), Some(e)) => Ok((s, e)),
            _ => Err(input_error(
                "baseline period required: pass --baseline-start and --baseline-end (YYYY-MM) \
                 or set them in the config file",
            )),
        }
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let file = File::open(path)
        .map_err(|e| input_error(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// A run directory named by the hash of (command, resolved config, input
/// digests): identical invocations land in the same directory with identical
/// bytes, and nothing in the output depends on the clock.
pub struct RunDir {
    pub path: PathBuf,
    manifest: Manifest,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_hash: String,
    config: Resolved,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(
        out_root: &Path,
        command: &str,
        config: &Resolved,
        inputs: &[&Path],
    ) -> CliResult<Self> {
        let config_json = serde_json::to_string(config).expect("config serializes");
        let mut digests = BTreeMap::new();
        for path in inputs {
            digests.insert(
                path.display().to_string(),
                format!("sha256:{}", sha256_file(path)?),
            );
        }

        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(b"\n");
        hasher.update(config_json.as_bytes());
        for (name, digest) in &digests {
            hasher.update(name.as_bytes());
            hasher.update(b"=");
            hasher.update(digest.as_bytes());
            hasher.update(b"\n");
        }
        let run_id = format!("{:x}", hasher.finalize());
        let config_hash = {
            let mut h = Sha256::new();
            h.update(config_json.as_bytes());
            format!("sha256:{:x}", h.finalize())
        };

        let path = out_root.join(format!("run-{}", &run_id[..12]));
        std::fs::create_dir_all(&path)?;
        Ok(Self {
            path,
            manifest: Manifest {
                command: command.to_string(),
                config_hash,
                config: config.clone(),
                inputs: digests,
                outputs: Vec::new(),
            },
        })
    }

    /// Write one output file and record it in the manifest.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
        let path = self.path.join(name);
        std::fs::write(&path, contents)?;
        self.manifest.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.manifest.outputs.sort();
        let mut json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        json.push(b'\n');
        std::fs::write(self.path.join("manifest.json"), json)?;
        Ok(self.path)
    }
}
