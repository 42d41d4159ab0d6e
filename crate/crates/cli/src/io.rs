//! Atomic file output, the series CSV and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spin7_core::flow::TypeIFit;
use spin7_core::{DiagRecord, FlowConfig, LatticeSpec};

use crate::error::{CliError, CliResult};

/// Write `bytes` to a sibling temporary file, sync it and rename it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(err)?;
        f.write_all(bytes).map_err(err)?;
        f.sync_all().map_err(err)?;
    }
    fs::rename(&tmp, path).map_err(err)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

/// Full-precision scientific notation (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a CSV table with a header line and float rows.
pub fn csv_table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `series.csv`, rewritten atomically on every flush.
pub struct SeriesWriter {
    path: PathBuf,
    text: String,
}

impl SeriesWriter {
    pub const FILE_NAME: &'static str = "series.csv";

    pub fn new(dir: &Path) -> Self {
        let mut text = String::from(DiagRecord::CSV_HEADER);
        text.push('\n');
        SeriesWriter {
            path: dir.join(Self::FILE_NAME),
            text,
        }
    }

    pub fn push(&mut self, r: &DiagRecord) {
        let cols: Vec<String> = r.csv_values().iter().map(|&x| fmt_f64(x)).collect();
        self.text.push_str(&cols.join(","));
        self.text.push('\n');
    }

    pub fn flush(&self) -> CliResult<()> {
        atomic_write(&self.path, self.text.as_bytes())
    }
}

/// SHA-256 of the canonical JSON rendering of a configuration.
pub fn config_hash(config: &FlowConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResumeInfo {
    pub checkpoint: PathBuf,
    pub step: u64,
}

/// Provenance of one `flow run` or `flow resume` invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub lattice: LatticeSpec,
    pub threads: usize,
    pub started_at: u64,
    pub finished_at: Option<u64>,
    /// `running` until the run ends, then the halt reason or the error.
    pub exit_reason: String,
    pub resumed_from: Option<ResumeInfo>,
    pub records: usize,
    pub final_step: Option<u64>,
    pub final_t: Option<f64>,
    /// `max |π₇ Div T|` at the final state.
    pub final_generator_max: Option<f64>,
    /// Fit of `max|T|` near an estimated singular time over the last
    /// records; present only when `max|T|` is growing like a blow-up.
    pub type_i_fit: Option<TypeIFit>,
    pub checkpoints: Vec<String>,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    pub fn start(config: &FlowConfig, resumed_from: Option<ResumeInfo>) -> Self {
        RunManifest {
            config_hash: config_hash(config),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            lattice: config.lattice.clone(),
            threads: rayon::current_num_threads(),
            started_at: unix_now(),
            finished_at: None,
            exit_reason: "running".into(),
            resumed_from,
            records: 0,
            final_step: None,
            final_t: None,
            final_generator_max: None,
            type_i_fit: None,
            checkpoints: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        atomic_write(&dir.join(Self::FILE_NAME), &json)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert!(!dir.path().join("a.txt.tmp").exists());
    }
}
