//! Deterministic file output: CSV with `#` parameter headers, run manifests.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Formats a float with 12 significant digits, the fixed width used in every
/// CSV cell so identical runs produce byte-identical files.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// A CSV file under construction: `#` header lines then data rows.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<String>,
}

impl Csv {
    pub fn new() -> Self {
        Self {
            header: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.header.push(format!("# {key}={}", value.as_ref()));
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.header.push(format!("# columns: {}", names.join(",")));
        self
    }

    pub fn row(&mut self, values: &[f64]) -> &mut Self {
        let cells: Vec<String> = values.iter().map(|&v| sig12(v)).collect();
        self.rows.push(cells.join(","));
        self
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        self.rows.push(format!("# {text}"));
        self
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let mut f = fs::File::create(path)?;
        for line in &self.header {
            writeln!(f, "{line}")?;
        }
        for line in &self.rows {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Reproducibility record written next to simulation outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub versions: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("satflux".into(), env!("CARGO_PKG_VERSION").into());
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            versions,
            wall_time_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(
            path,
            serde_json::to_string_pretty(self).expect("serializable"),
        )
    }
}

/// Resolves an output path against the output directory (flag beats the
/// `SATFLUX_OUT_DIR` environment override; absolute paths pass through).
pub fn resolve(out_dir: &Option<PathBuf>, path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let base = out_dir
        .clone()
        .or_else(|| std::env::var_os("SATFLUX_OUT_DIR").map(PathBuf::from));
    match base {
        Some(dir) => dir.join(path),
        None => path.to_path_buf(),
    }
}
