//! Artifact emission: CSV files with fixed headers, a JSON run manifest, and
//! floating-point formatting pinned to 12 significant digits so reruns diff
//! cleanly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Resolved;

/// 12 significant digits, scientific; the single float-formatting convention
/// for every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

pub struct OutputSink {
    dir: PathBuf,
    outputs: Vec<String>,
    notes: BTreeMap<String, String>,
}

impl OutputSink {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
        })
    }

    pub fn write_csv(&mut self, name: &str, rows: &[String]) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = rows.join("\n");
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Summary values echoed into the manifest (not the CSVs).
    pub fn note(&mut self, key: &str, value: String) {
        self.notes.insert(key.to_string(), value);
    }

    pub fn write_manifest(
        &mut self,
        subcommand: &str,
        rc: &Resolved,
        elapsed: Duration,
    ) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            subcommand: &'a str,
            code_version: &'a str,
            seed: u64,
            trials: u64,
            horizon: usize,
            workers: usize,
            config: &'a crate::config::FileConfig,
            outputs: &'a [String],
            notes: &'a BTreeMap<String, String>,
            wall_time_secs: f64,
        }
        let manifest = Manifest {
            subcommand,
            code_version: env!("CARGO_PKG_VERSION"),
            seed: rc.seed,
            trials: rc.trials,
            horizon: rc.horizon,
            workers: rc.workers,
            config: &rc.config,
            outputs: &self.outputs,
            notes: &self.notes,
            wall_time_secs: elapsed.as_secs_f64(),
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
