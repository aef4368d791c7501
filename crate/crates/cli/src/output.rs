//! Output files and the run manifest.

use std::path::{Path, PathBuf};

use isac_core::channels::ChannelConfig;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cli::Command;
use crate::{CliError, CliResult};

/// Bumped whenever a CSV column changes.
pub const CSV_SCHEMA: u32 = 1;
const MANIFEST: &str = "manifest.json";

/// Twelve significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Compute(format!("cannot write `{}`: {e}", path.display()))
}

/// Files written by one command, in order.
pub struct Run {
    dir: PathBuf,
    outputs: Vec<(String, String)>,
}

impl Run {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Run {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, &bytes).map_err(|e| io_err(&path, e))?;
        self.outputs.push((name.to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.dir.join(name);
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io_err(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| io_err(&path, e))?;
        self.write(name, bytes)
    }

    pub fn json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| io_err(&self.dir.join(name), e))?;
        bytes.push(b'\n');
        self.write(name, bytes)
    }
}

pub struct Manifest {
    value: Value,
}

/// Parameters that affect results: paths are dropped.
fn result_parameters(command: &Command) -> Value {
    let mut v = serde_json::to_value(command).expect("commands serialize");
    if let Some(map) = v.as_object_mut() {
        map.remove("config");
        map.remove("out");
        map.remove("allocation");
    }
    v
}

impl Manifest {
    pub fn new(command: Command, config: &ChannelConfig, run: Run) -> Self {
        let doc = config.to_json_value();
        let inputs = json!({ "config": doc, "parameters": result_parameters(&command) });
        let seed = match &command {
            Command::Simulate(a) => Some(a.seed),
            _ => None,
        };
        let value = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "csv_schema": CSV_SCHEMA,
            "command": command.name(),
            "parameters": serde_json::to_value(&command).expect("commands serialize"),
            "seed": seed,
            "config": doc,
            "config_sha256": sha256_hex(doc.to_string().as_bytes()),
            "inputs_sha256": sha256_hex(inputs.to_string().as_bytes()),
            "outputs": run
                .outputs
                .iter()
                .map(|(file, sha)| json!({ "file": file, "sha256": sha }))
                .collect::<Vec<_>>(),
        });
        Manifest { value }
    }

    pub fn write(self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST);
        let mut bytes = serde_json::to_vec_pretty(&self.value).map_err(|e| io_err(&path, e))?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

/// Command and embedded channel configuration of a manifest.
pub fn read_manifest(path: &Path) -> CliResult<(Command, ChannelConfig)> {
    let usage = |m: String| CliError::Usage(format!("manifest `{}`: {m}", path.display()));
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read: {e}")))?;
    let v: Value = serde_json::from_str(&src).map_err(|e| usage(e.to_string()))?;
    let params = v.get("parameters").cloned().ok_or_else(|| usage("missing `parameters`".into()))?;
    let command: Command = serde_json::from_value(params).map_err(|e| usage(format!("at `parameters`: {e}")))?;
    if matches!(command, Command::Replay(_)) {
        return Err(usage("a manifest cannot record a replay".into()));
    }
    let doc = v.get("config").ok_or_else(|| usage("missing `config`".into()))?;
    let config = ChannelConfig::from_json_str(&doc.to_string()).map_err(|e| usage(format!("at `config`: {e}")))?;
    Ok((command, config))
}
