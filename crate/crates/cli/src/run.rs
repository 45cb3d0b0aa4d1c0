//! `run`: execute an experiment config with per-walk-length flushing.

use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use nilwalk::montecarlo::{run_experiment, CsvRow, ExperimentConfig};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStatus {
    pub experiment_id: String,
    /// `running`, `complete` or `failed`.
    pub status: String,
    pub points_done: usize,
    pub points_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// SHA-256 of the canonical config JSON (keys sorted, seed applied).
    pub config_hash: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub experiments: Vec<ExperimentStatus>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    format!("{:x}", Sha256::digest(cfg.canonical_json().as_bytes()))
}

pub struct OutputPaths {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub manifest: PathBuf,
}

impl OutputPaths {
    fn new(dir: &Path, id: &str) -> Self {
        OutputPaths {
            csv: dir.join(format!("{id}.csv")),
            report: dir.join(format!("{id}.report.json")),
            manifest: dir.join(format!("{id}.manifest.json")),
        }
    }
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), Failure> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<CsvRow>, Failure> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<CsvRow>, _>>()?)
}

/// Rows from an earlier run of the same config, if its manifest matches.
fn prior_rows(paths: &OutputPaths, hash: &str) -> Result<Vec<CsvRow>, Failure> {
    if !paths.manifest.exists() || !paths.csv.exists() {
        return Ok(vec![]);
    }
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(&paths.manifest)?)?;
    if m.config_hash != hash {
        return Err(Failure::usage(format!(
            "cannot resume: {} was written by a different config",
            paths.csv.display()
        )));
    }
    read_rows(&paths.csv)
}

pub fn run(config: &Path, out_dir: Option<&Path>, resume: bool, seed: Option<u64>) -> Result<(), Failure> {
    let text = fs::read_to_string(config)?;
    let mut cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("invalid config {}: {e}", config.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let paths = OutputPaths::new(&dir, &cfg.experiment_id);
    let hash = config_hash(&cfg);
    let done = if resume { prior_rows(&paths, &hash)? } else { vec![] };

    let total = cfg.points().len();
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: hash.clone(),
        seed: cfg.seed,
        started_unix: now(),
        finished_unix: None,
        experiments: vec![ExperimentStatus {
            experiment_id: cfg.experiment_id.clone(),
            status: "running".into(),
            points_done: 0,
            points_total: total,
            error: None,
        }],
    };
    write_json(&paths.manifest, &manifest)?;

    let file = if done.is_empty() {
        File::create(&paths.csv)?
    } else {
        OpenOptions::new().append(true).open(&paths.csv)?
    };
    let mut writer = csv::WriterBuilder::new().has_headers(done.is_empty()).from_writer(file);
    let mut points_done = cfg.points().iter().filter(|n| done.iter().any(|r| r.n == **n)).count();
    let result = run_experiment(&cfg, &done, |rows| {
        for r in rows {
            writer.serialize(r).map_err(|e| nilwalk::Error::Parse(e.to_string()))?;
        }
        writer.flush().map_err(|e| nilwalk::Error::Parse(e.to_string()))?;
        points_done += 1;
        Ok(())
    });
    writer.flush()?;
    drop(writer);
    manifest.finished_unix = Some(now());
    let status = &mut manifest.experiments[0];
    status.points_done = points_done;
    match result {
        Ok(out) => {
            status.status = "complete".into();
            write_json(&paths.manifest, &manifest)?;
            let report = json!({
                "experiment_id": cfg.experiment_id,
                "group": cfg.group,
                "config_hash": hash,
                "seed": cfg.seed,
                "report": out.report,
            });
            write_json(&paths.report, &report)?;
            crate::commands::print_json(&report)
        }
        Err(e) => {
            status.status = "failed".into();
            status.error = Some(e.to_string());
            write_json(&paths.manifest, &manifest)?;
            Err(e.into())
        }
    }
}
