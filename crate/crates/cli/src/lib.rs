//! Experiment runner for the q4nls laboratory.
//!
//! A run parses a flat TOML config, validates every key the chosen experiment
//! needs, computes everything in memory, and only then writes artifacts plus
//! a `manifest.json` with checksums. Any failure removes what was written.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub mod config;
mod experiments;

pub use config::{Experiment, Resolved, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid `{key}`: {message}")]
pub struct ValidationError {
    pub key: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationError {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("numerical divergence: {0}")]
    Divergence(q4nls_core::Error),
    #[error(transparent)]
    Numerical(q4nls_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("report: {0}")]
    Report(String),
}

impl RunError {
    /// 2 for validation, 3 for divergence, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Divergence(_) => 3,
            _ => 1,
        }
    }

    fn io(context: impl Into<String>, source: io::Error) -> Self {
        RunError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<q4nls_core::Error> for RunError {
    fn from(e: q4nls_core::Error) -> Self {
        use q4nls_core::Error as E;
        match e {
            e if e.is_divergence() => RunError::Divergence(e),
            // Parameter problems the validator could not see without computing.
            E::InvalidArgument(_)
            | E::InvalidGrid(_)
            | E::NotDyadic(_)
            | E::UnresolvedCubes { .. }
            | E::TransitExceeded { .. } => {
                RunError::Validation(ValidationError::new("config", e.to_string()))
            }
            e => RunError::Numerical(e),
        }
    }
}

/// One output file, held in memory until the whole run has succeeded.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact {
            name: name.into(),
            bytes,
        }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        Artifact::new(name, bytes)
    }
}

/// What an experiment hands back to the runner.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// The table `emit_report` copies to `report.csv`, if the experiment has one.
    pub primary_table: Option<String>,
    /// The JSON summary `emit_report` embeds in `report.json`.
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub experiment: String,
    pub config_sha256: String,
    pub version: String,
    pub seed: u64,
    pub primary_table: Option<String>,
    pub summary: Option<String>,
    pub artifacts: Vec<ArtifactRecord>,
    /// Kept out of `manifest.json` so reruns stay byte-identical; written to
    /// `run.log` instead.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Hash of the config with `output_dir` removed, so the same experiment
/// written to two places hashes identically.
pub fn config_hash(raw: &RunConfig) -> String {
    let mut canonical = raw.clone();
    canonical.output_dir = None;
    let text = toml::to_string(&canonical).expect("config serializes");
    sha256_hex(text.as_bytes())
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Resolved, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::io(format!("reading {}", path.display()), e))?;
    let mut raw = RunConfig::parse(&text)?;
    if let Some(name) = &overrides.experiment {
        match &raw.experiment {
            Some(existing) if existing != name => {
                return Err(ValidationError::new(
                    "experiment",
                    format!("config names {existing:?} but the command line asks for {name:?}"),
                )
                .into())
            }
            _ => raw.experiment = Some(name.clone()),
        }
    }
    if let Some(seed) = overrides.seed {
        raw.seed = Some(seed);
    }
    if let Some(out) = &overrides.output_dir {
        raw.output_dir = Some(out.clone());
    }
    Ok(Resolved::new(raw)?)
}

/// Tracks files created by a run so a failure can take them back.
struct Writer {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Writer, RunError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)
            .map_err(|e| RunError::io(format!("creating {}", dir.display()), e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| RunError::io(format!("writing {}", path.display()), e))?;
        self.written.push(path);
        Ok(())
    }

    fn roll_back(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Run the experiment on the current rayon pool and persist its artifacts.
pub fn run_experiment(cfg: &Resolved) -> Result<RunManifest, RunError> {
    let started = Instant::now();
    let outcome = experiments::run(cfg)?;
    let mut manifest = RunManifest {
        experiment: cfg.experiment.name().to_string(),
        config_sha256: config_hash(&cfg.raw),
        version: VERSION.to_string(),
        seed: cfg.seed,
        primary_table: outcome.primary_table.clone(),
        summary: Some(outcome.summary.clone()),
        artifacts: outcome
            .artifacts
            .iter()
            .map(|a| ArtifactRecord {
                path: a.name.clone(),
                bytes: a.bytes.len() as u64,
                sha256: sha256_hex(&a.bytes),
            })
            .collect(),
        wall_clock_seconds: 0.0,
        output_dir: cfg.output_dir.clone(),
    };

    let mut writer = Writer::new(&cfg.output_dir)?;
    let result = (|| -> Result<(), RunError> {
        for a in &outcome.artifacts {
            writer.write(&a.name, &a.bytes)?;
        }
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        writer.write(MANIFEST_NAME, &bytes)?;
        for format in [ReportFormat::Csv, ReportFormat::Json] {
            if let Some((name, bytes)) = render_report(&manifest, format)? {
                writer.write(&name, &bytes)?;
            }
        }
        manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
        let log = format!(
            "experiment {}\nversion {}\nconfig_sha256 {}\nwall_clock_seconds {:.3}\n",
            manifest.experiment,
            manifest.version,
            manifest.config_sha256,
            manifest.wall_clock_seconds
        );
        writer.write("run.log", log.as_bytes())
    })();
    match result {
        Ok(()) => Ok(manifest),
        Err(e) => {
            writer.roll_back();
            Err(e)
        }
    }
}

/// Run on a dedicated pool with `workers` threads.
pub fn run_with_workers(cfg: &Resolved, workers: usize) -> Result<RunManifest, RunError> {
    if workers == 0 {
        return Err(ValidationError::new("workers", "must be at least 1").into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Report(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn check_artifacts(manifest: &RunManifest) -> Result<(), RunError> {
    if manifest.artifacts.is_empty() {
        return Err(RunError::Report("manifest lists no artifacts".into()));
    }
    let mut missing = Vec::new();
    for a in &manifest.artifacts {
        match fs::read(manifest.output_dir.join(&a.path)) {
            Ok(bytes) if sha256_hex(&bytes) == a.sha256 => {}
            Ok(_) => missing.push(format!("{} (checksum mismatch)", a.path)),
            Err(_) => missing.push(a.path.clone()),
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(RunError::Report(format!(
            "missing artifacts: {}",
            missing.join(", ")
        )))
    }
}

fn render_report(
    manifest: &RunManifest,
    format: ReportFormat,
) -> Result<Option<(String, Vec<u8>)>, RunError> {
    check_artifacts(manifest)?;
    let read = |name: &str| {
        let path = manifest.output_dir.join(name);
        fs::read(&path).map_err(|e| RunError::io(format!("reading {}", path.display()), e))
    };
    match format {
        ReportFormat::Csv => match &manifest.primary_table {
            Some(table) => Ok(Some(("report.csv".into(), read(table)?))),
            None => Ok(None),
        },
        ReportFormat::Json => {
            let summary: serde_json::Value = match &manifest.summary {
                Some(name) => serde_json::from_slice(&read(name)?)
                    .map_err(|e| RunError::Report(format!("{name}: {e}")))?,
                None => serde_json::Value::Null,
            };
            let report = serde_json::json!({
                "experiment": manifest.experiment,
                "version": manifest.version,
                "config_sha256": manifest.config_sha256,
                "seed": manifest.seed,
                "tables": manifest
                    .artifacts
                    .iter()
                    .filter(|a| a.path.ends_with(".csv"))
                    .map(|a| a.path.clone())
                    .collect::<Vec<_>>(),
                "summary": summary,
            });
            let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
            bytes.push(b'\n');
            Ok(Some(("report.json".into(), bytes)))
        }
    }
}

/// Write the consolidated `report.csv` (the primary table) or `report.json`
/// (summary plus provenance) next to the manifest's artifacts.
pub fn emit_report(manifest: &RunManifest, format: ReportFormat) -> Result<Vec<PathBuf>, RunError> {
    match render_report(manifest, format)? {
        Some((name, bytes)) => {
            let path = manifest.output_dir.join(name);
            fs::write(&path, bytes)
                .map_err(|e| RunError::io(format!("writing {}", path.display()), e))?;
            Ok(vec![path])
        }
        None => Ok(Vec::new()),
    }
}

/// Read `manifest.json` back from a run directory.
pub fn read_manifest(dir: &Path) -> Result<RunManifest, RunError> {
    let path = dir.join(MANIFEST_NAME);
    let bytes =
        fs::read(&path).map_err(|e| RunError::io(format!("reading {}", path.display()), e))?;
    let mut m: RunManifest = serde_json::from_slice(&bytes)
        .map_err(|e| RunError::Report(format!("{}: {e}", path.display())))?;
    m.output_dir = dir.to_path_buf();
    Ok(m)
}
