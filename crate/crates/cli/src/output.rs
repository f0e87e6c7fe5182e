//! CSV writers, the run manifest and the `--check` comparison.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Accumulates the files written by one command.
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Two-column key/value CSV.
    pub fn summary(&mut self, name: &str, entries: &[(String, String)]) -> Result<()> {
        self.csv(
            name,
            &["key", "value"],
            entries.iter().map(|(k, v)| vec![k.clone(), v.clone()]),
        )
    }

    pub fn finish(self, mut manifest: Manifest) -> Result<Vec<String>> {
        manifest.outputs = self.files.clone();
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        let mut all = self.files;
        all.push(MANIFEST.to_string());
        Ok(all)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments that reproduce the run (without `--out`, `--check`,
    /// `--workers`).
    pub args: Vec<String>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, args: Vec<String>, seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            seed,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Files that differ (or are missing) between two output directories.
pub fn diff_dirs(expected: &Path, actual: &Path, files: &[String]) -> Vec<String> {
    files
        .iter()
        .filter(|f| {
            let a = fs::read(expected.join(f.as_str()));
            let b = fs::read(actual.join(f.as_str()));
            !matches!((a, b), (Ok(a), Ok(b)) if a == b)
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_num(None), "");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.csv("a.csv", &["x"], [vec![num(1.0)]]).unwrap();
        let m = Manifest::new("simulate", vec!["simulate".into(), "fhn".into()], 3, BTreeMap::new());
        let files = out.finish(m.clone()).unwrap();
        assert_eq!(files, ["a.csv", MANIFEST]);
        let back = Manifest::read(dir.path()).unwrap();
        assert_eq!(back.outputs, ["a.csv"]);
        assert_eq!(back.seed, 3);
        assert!(diff_dirs(dir.path(), dir.path(), &files).is_empty());
    }
}
