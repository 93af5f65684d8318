//! Run records and output-directory bookkeeping.
//!
//! Every subcommand ends by writing `run.json`: what ran, with which
//! parameters and seed, how long it took, which files it produced, and a
//! few summary metrics. Everything except the wall time is a pure function
//! of the arguments, so reruns can be compared file by file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// What a finished command reports. `outputs` holds file names relative to
/// the output directory; `metrics` is a flat JSON object.
pub struct RunRecord {
    pub command: &'static str,
    pub parameters: Value,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub metrics: Value,
}

impl RunRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "wall_time_seconds": self.wall_time_seconds,
            "outputs": self.outputs,
            "metrics": self.metrics,
        })
    }
}

/// An output directory plus the names of the files written into it so far.
pub struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Outputs { dir: dir.to_path_buf(), names: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.names.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn into_names(self) -> Vec<String> {
        self.names
    }
}

/// Serializes rows into an in-memory CSV file.
pub fn csv_bytes<F>(build: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w)?;
    w.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))
}
