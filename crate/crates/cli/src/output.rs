//! Output directory handling: tables, JSON documents, SVG files and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Default output root when neither `--out` nor `output.dir` is given.
pub const OUT_DIR_ENV: &str = "SQZ_OUT_DIR";
const DEFAULT_ROOT: &str = "sqz-out";

/// Column-oriented numeric table. Column names carry their unit as a suffix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Builds a table from equal-length columns.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Self {
        let n = columns.first().map_or(0, |c| c.1.len());
        debug_assert!(columns.iter().all(|c| c.1.len() == n));
        let rows = (0..n).map(|k| columns.iter().map(|c| c.1[k]).collect()).collect();
        Self {
            columns: columns.into_iter().map(|c| c.0).collect(),
            rows,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        let mut data = Map::new();
        for (k, name) in self.columns.iter().enumerate() {
            data.insert(name.clone(), json!(self.rows.iter().map(|r| r[k]).collect::<Vec<f64>>()));
        }
        json!({ "columns": self.columns, "data": data })
    }
}

/// Resolves the run directory: `--out`, then `output.dir`, then
/// `$SQZ_OUT_DIR/<name>`, then `sqz-out/<name>`.
pub fn resolve_out_dir(cli_out: Option<&Path>, config: &RunConfig, name: &str) -> PathBuf {
    if let Some(dir) = cli_out {
        return dir.to_path_buf();
    }
    if let Some(dir) = &config.output.dir {
        return dir.clone();
    }
    let root = std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT));
    root.join(name)
}

/// Writes one run directory and records every emitted file.
pub struct Emitter {
    dir: PathBuf,
    formats: Vec<Format>,
    files: Vec<PathBuf>,
}

impl Emitter {
    pub fn create(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| {
            CliError::Config(vec![format!("output directory {} is not writable: {e}", dir.display())])
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    /// `<name>.csv` and/or `<name>.json` depending on the formats.
    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        if self.wants(Format::Csv) {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            self.write(&format!("{name}.csv"), &buf)?;
        }
        if self.wants(Format::Json) {
            let text = serde_json::to_string_pretty(&table.to_json()).expect("table serializes");
            self.write(&format!("{name}.json"), text.as_bytes())?;
        }
        Ok(())
    }

    /// Always written, whatever the formats.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("document serializes");
        self.write(&format!("{name}.json"), text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, render: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.wants(Format::Svg) {
            let doc = render();
            self.write(&format!("{name}.svg"), doc.as_bytes())?;
        }
        Ok(())
    }

    /// Records files written by other code under the run directory.
    pub fn record(&mut self, files: impl IntoIterator<Item = PathBuf>) {
        self.files.extend(files);
    }

    /// Writes `manifest.json` and returns every emitted path.
    pub fn finish(mut self, manifest: Manifest) -> Result<Vec<PathBuf>, CliError> {
        let mut files: Vec<String> = self
            .files
            .iter()
            .map(|p| p.strip_prefix(&self.dir).unwrap_or(p).to_string_lossy().replace('\\', "/"))
            .collect();
        files.sort();
        files.dedup();
        let doc = manifest.into_json(&self.formats, files);
        let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        self.write("manifest.json", text.as_bytes())?;
        Ok(self.files)
    }
}

/// Provenance of one run.
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub summary: Value,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn provenance(&self) -> Value {
        json!({
            "command": self.command,
            "config_sha256": self.config.sha256(),
            "seed": self.seed,
            "versions": versions(),
        })
    }

    fn into_json(self, formats: &[Format], files: Vec<String>) -> Value {
        json!({
            "command": self.command,
            "config_sha256": self.config.sha256(),
            "seed": self.seed,
            "versions": versions(),
            "formats": formats,
            "config": self.config,
            "summary": self.summary,
            "notes": self.notes,
            "files": files,
        })
    }
}

fn versions() -> Value {
    json!({
        "rfsqueeze-cli": env!("CARGO_PKG_VERSION"),
        "rfsqueeze-core": rfsqueeze_core::VERSION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let t = Table::from_columns(vec![("a_ns".into(), vec![1.0, 2.0]), ("b_rad".into(), vec![0.5, -0.25])]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a_ns,b_rad\n1e0,5e-1\n2e0,-2.5e-1\n");
        assert_eq!(t.column("b_rad").unwrap(), vec![0.5, -0.25]);
    }

    #[test]
    fn explicit_out_wins() {
        let c = RunConfig::default();
        assert_eq!(resolve_out_dir(Some(Path::new("x")), &c, "fig"), PathBuf::from("x"));
    }
}
