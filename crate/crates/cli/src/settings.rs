//! Config-file handling, error-to-exit-code mapping, and run manifests.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use accentor::dataset::DatasetError;
use accentor::modelio::ModelIoError;
use accentor::nn::NnError;
use accentor::trainer::{RunManifest, TrainError};

/// Command failures bucketed by exit code: usage/parse problems exit 1,
/// numeric aborts exit 2, failed checks exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Check(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Check(m) => f.write_str(m),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFiniteActivation { .. } => CliError::Numeric(e.to_string()),
            NnError::CheckFailed { .. } => CliError::Check(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Numeric { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Union of all settings a config file may carry. Keys mirror the long
/// flag names; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ConfigFile {
    pub mode: Option<String>,
    pub data: Option<PathBuf>,
    pub dict: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub models: Option<Vec<PathBuf>>,
    pub report: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub hidden: Option<usize>,
    pub dropout: Option<f64>,
    pub lr: Option<f64>,
    pub max_len: Option<usize>,
    pub channels: Option<usize>,
    pub train_fraction: Option<String>,
    pub dev_fraction: Option<String>,
    pub reproducible: Option<bool>,
    pub decode: Option<String>,
    pub strict: Option<bool>,
    pub select_on_test: Option<bool>,
    pub context: Option<String>,
    pub yo_rule: Option<String>,
    pub mono: Option<String>,
    pub min_count: Option<u64>,
    pub top_k: Option<usize>,
    pub threshold_basis: Option<String>,
    pub split: Option<String>,
    pub format: Option<String>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub instances: Option<usize>,
    pub maxlen: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Take the flag value, fall back to the config, then the default.
pub fn resolve<T: Clone>(cli: Option<T>, cfg: Option<T>, default: T) -> T {
    cli.or(cfg).unwrap_or(default)
}

/// Same, for settings with no default: missing is a usage error.
pub fn require<T: Clone>(cli: Option<T>, cfg: Option<T>, flag: &str) -> Result<T, CliError> {
    cli.or(cfg)
        .ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

pub fn parse_as<T>(value: String, flag: &str) -> Result<T, CliError>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// FNV-1a over bytes, printed as hex; used for manifest digests.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Digest over the reproducible part of a manifest: settings, dataset
/// digest, per-epoch numbers and best epoch, with wall clock excluded.
pub fn manifest_digest(manifest: &RunManifest) -> String {
    let mut stripped = manifest.clone();
    for rec in &mut stripped.records {
        rec.wall_secs = 0.0;
    }
    digest_bytes(&serde_json::to_vec(&stripped).expect("manifest serializes"))
}

/// Write the manifest to the explicit path, else the default path, else a
/// single diagnostic line on stderr.
pub fn emit_manifest(
    manifest: &serde_json::Value,
    explicit: Option<&Path>,
    default_path: Option<&Path>,
) -> Result<(), CliError> {
    let pretty = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    match explicit.or(default_path) {
        Some(path) => fs::write(path, pretty)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            eprintln!("manifest: {}", serde_json::to_string(manifest).unwrap());
            Ok(())
        }
    }
}
