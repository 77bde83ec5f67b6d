use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

/// One `(parameter, value, group)` row of a curve file.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub parameter: f64,
    pub value: f64,
    pub group: String,
}

/// SHA-256 of the canonical JSON of the effective configuration.
pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Files of one run: `<command>-<hash16>.json`, `.csv`, `.circuit.json`,
/// and the append-only `.meta.jsonl`.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    hash: String,
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

impl Output {
    pub fn new(dir: &Path, command: &'static str, cfg: &RunConfig) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), command, hash: config_hash(cfg) })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}-{}{suffix}", self.command, &self.hash[..16]))
    }

    /// Writes `body` (an object) with the command and config hash merged in.
    /// An existing report is kept when identical; a different one is an error.
    pub fn report<S: Serialize>(&self, body: &S) -> Result<PathBuf, Failure> {
        let mut map = match serde_json::to_value(body).map_err(|e| Failure::Config(e.to_string()))? {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("result".into(), other);
                m
            }
        };
        map.insert("command".into(), Value::from(self.command));
        map.insert("config_hash".into(), Value::from(self.hash.clone()));
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("value serializes");
        text.push('\n');
        self.write_once(&self.path(".json"), text.as_bytes())
    }

    pub fn circuit(&self, json: &str) -> Result<PathBuf, Failure> {
        self.write_once(&self.path(".circuit.json"), json.as_bytes())
    }

    pub fn curves(&self, rows: &[Row]) -> Result<PathBuf, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| Failure::Config(e.to_string()))?;
        }
        if rows.is_empty() {
            w.write_record(["parameter", "value", "group"]).map_err(|e| Failure::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Config(e.to_string()))?;
        self.write_once(&self.path(".csv"), &bytes)
    }

    /// Appends one line with the wall-clock time and the config path.
    pub fn meta(&self, config_path: &Path, exit_code: i32) -> Result<(), Failure> {
        let path = self.path(".meta.jsonl");
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let line = serde_json::json!({
            "unix_time": secs,
            "config_path": config_path.display().to_string(),
            "config_hash": self.hash,
            "exit_code": exit_code,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| io_failure(&path, e))?;
        writeln!(f, "{line}").map_err(|e| io_failure(&path, e))
    }

    fn write_once(&self, path: &Path, bytes: &[u8]) -> Result<PathBuf, Failure> {
        match fs::read(path) {
            Ok(existing) if existing == bytes => Ok(path.to_path_buf()),
            Ok(_) => Err(Failure::Config(format!("{} exists with different content; refusing to overwrite", path.display()))),
            Err(_) => {
                fs::write(path, bytes).map_err(|e| io_failure(path, e))?;
                Ok(path.to_path_buf())
            }
        }
    }
}
