//! CSV tables and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

/// A table cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// One CSV output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Table { file_name: file_name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> LabResult<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::render))?;
        }
        writer.into_inner().map_err(|e| LabError::io(PathBuf::from(&self.file_name), e.into_error()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        LabError::io(path.to_path_buf(), e)
    })
}

/// A written file and its digest.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub file_name: String,
    pub sha256: String,
    pub rows: usize,
}

pub fn write_tables(dir: &Path, tables: &[Table]) -> LabResult<Vec<Emitted>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir.to_path_buf(), e))?;
    tables
        .iter()
        .map(|table| {
            let bytes = table.to_bytes()?;
            write_atomic(&dir.join(&table.file_name), &bytes)?;
            Ok(Emitted { file_name: table.file_name.clone(), sha256: sha256_hex(&bytes), rows: table.rows.len() })
        })
        .collect()
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Checks every digest listed in a manifest against the files beside it.
/// Returns the names of files that are missing or do not match.
pub fn verify_manifest(dir: &Path) -> LabResult<Vec<String>> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| LabError::io(path.clone(), e))?;
    let manifest: Value = serde_json::from_str(&text)?;
    let outputs = manifest["outputs"].as_array().cloned().unwrap_or_default();
    let mut bad = Vec::new();
    for entry in outputs {
        let name = entry["file"].as_str().unwrap_or_default().to_string();
        let expected = entry["sha256"].as_str().unwrap_or_default();
        match fs::read(dir.join(&name)) {
            Ok(bytes) if sha256_hex(&bytes) == expected => {}
            _ => bad.push(name),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut t = Table::new("x.csv", &["t", "k", "label"]);
        t.push(vec![0.1.into(), 3usize.into(), "a,b".into()]);
        t.push(vec![(-2.5e-300).into(), 0usize.into(), true.into()]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "t,k,label\n1.0000000000000001e-1,3,\"a,b\"\n-2.5000000000000000e-300,0,true\n");
        // 17 significant digits round-trip every double.
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn atomic_write_and_digest() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("a.csv", &["x"]);
        t.push(vec![1.0.into()]);
        let emitted = write_tables(dir.path(), &[t]).unwrap();
        let bytes = fs::read(dir.path().join("a.csv")).unwrap();
        assert_eq!(emitted[0].sha256, sha256_hex(&bytes));
        assert!(!dir.path().join("a.csv.tmp").exists());
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
