use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// A CSV table held in memory until every output is ready.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &'static str, header: &[&'static str]) -> Self {
        Self {
            file_name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// 17 significant digits, enough to round-trip a double.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

pub fn opt_flag(b: Option<bool>) -> String {
    b.map(flag).unwrap_or_default()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    if let Err(e) = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(())
}

/// Writes `report.json` and every table into `dir`, each through a temporary
/// file and a rename. Returns the paths written.
pub fn write_outputs(dir: &Path, report_json: &[u8], tables: &[Table]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut encoded = Vec::with_capacity(tables.len());
    for t in tables {
        let bytes = t.to_bytes().map_err(|e| io::Error::other(e.to_string()))?;
        encoded.push((dir.join(t.file_name), bytes));
    }
    let mut written = Vec::new();
    for (path, bytes) in encoded {
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    let report = dir.join("report.json");
    write_atomic(&report, report_json)?;
    written.push(report);
    Ok(written)
}
