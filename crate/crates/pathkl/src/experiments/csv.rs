//! CSV emission and consumption. Tables use a header row, comma separators,
//! LF line endings, and 17 significant digits so every f64 round-trips.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Format a float with 17 significant digits (shortest exact round-trip).
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Write an n x d sample cloud with coordinate columns `d0, d1, ...`.
pub fn write_samples(path: &Path, samples: &[f64], dim: usize) -> Result<()> {
    let header: Vec<String> = (0..dim).map(|j| format!("d{j}")).collect();
    let mut table = CsvTable::new(header);
    for row in samples.chunks_exact(dim) {
        table.push_row(row.iter().map(|v| fmt(*v)).collect());
    }
    table.write(path)
}

/// Read a sample cloud written by [`write_samples`]. Returns (samples, dim).
pub fn read_samples(path: &Path, hint: &'static str) -> Result<(Vec<f64>, usize)> {
    let text = fs::read_to_string(path).map_err(|_| Error::MissingArtifact {
        path: path.to_path_buf(),
        hint,
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain(format!("{}: empty file", path.display())))?;
    let dim = header.split(',').count();
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::domain(format!("{}: bad float on row {i}", path.display())))?;
            samples.push(v);
        }
    }
    if samples.is_empty() || samples.len() % dim != 0 {
        return Err(Error::domain(format!(
            "{}: malformed sample table",
            path.display()
        )));
    }
    Ok((samples, dim))
}
