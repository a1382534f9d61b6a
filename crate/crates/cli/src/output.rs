//! CSV tables and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table with a fixed header.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width");
        self.rows.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub output_dir: String,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub exit_code: i32,
    pub artifacts: Vec<Artifact>,
}

/// Writes files below one directory and remembers their checksums.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutDir {
    pub fn create(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            artifacts: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> io::Result<()> {
        self.write(name, &table.render())
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn finish(self, manifest: RunManifest) -> io::Result<()> {
        let json = serde_json::to_string_pretty(&RunManifest {
            artifacts: self.artifacts,
            ..manifest
        })
        .map_err(io::Error::other)?;
        fs::write(self.root.join("manifest.json"), json + "\n")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_has_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(0.0), "0.0000000000000000e0");
        assert_eq!(float(-1.5), "-1.5000000000000000e0");
        for x in [std::f64::consts::PI, 1e-300, 6.02214076e23] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_renders_header_first() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(), "a,b\n1,2\n");
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
