//! Per-run output directory: `config.echo`, `observables.csv`, `bounds.json`,
//! `verdict.json`, `metrics.json`, `pulse.csv` and `snapshots/`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kramers_core::state::write_binary;
use kramers_core::Wavefunction64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const OBSERVABLES_HEADER: &str = "t,N_G,N_F1,survival,W,v_x,v_y,v_z,angle";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub t: f64,
    pub n_g: f64,
    pub n_f1: f64,
    pub survival: f64,
    pub w: f64,
    pub v: [f64; 3],
    pub angle: f64,
}

impl ObservableRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t, self.n_g, self.n_f1, self.survival, self.w, self.v[0], self.v[1], self.v[2], self.angle
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Machine-readable outcome of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub version: String,
    pub passed: bool,
    pub exit_code: i32,
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn new(command: &str, config_hash: Option<String>, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Verdict {
            command: command.into(),
            config_hash,
            version: VERSION.into(),
            passed,
            exit_code: if passed { 0 } else { 1 },
            checks,
        }
    }
}

/// Non-reproducible run facts, kept out of the files compared for reproducibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub wall_clock_s: f64,
    pub steps: usize,
    pub threads: usize,
    pub version: String,
}

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| HarnessError::io(root, e))?;
        Ok(RunDir {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| HarnessError::io(p, e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("serialisable output");
        s.push('\n');
        self.write_text(name, &s)
    }

    pub fn write_config(&self, cfg: &RunConfig) -> Result<()> {
        let text = format!("# config hash {}\n{}", cfg.hash(), cfg.to_toml());
        self.write_text("config.echo", &text)
    }

    pub fn write_rows(&self, rows: &[ObservableRow]) -> Result<()> {
        let mut s = String::with_capacity(64 * (rows.len() + 1));
        s.push_str(OBSERVABLES_HEADER);
        s.push('\n');
        for r in rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        self.write_text("observables.csv", &s)
    }

    pub fn write_with<F>(&self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    {
        let p = self.path(name);
        let file = fs::File::create(&p).map_err(|e| HarnessError::io(&p, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| HarnessError::io(p, e))
    }

    pub fn write_snapshot(&self, step: usize, psi: &Wavefunction64) -> Result<()> {
        let dir = self.path("snapshots");
        fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        self.write_with(&format!("snapshots/psi_{step:07}.kwf"), |w| write_binary(psi, w))
    }
}
