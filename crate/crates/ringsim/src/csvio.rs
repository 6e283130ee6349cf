//! CSV artifacts: `#`-prefixed metadata lines, a header row, then
//! comma-separated numeric rows with `.` decimals. Files are written
//! atomically (temp file + rename) and reads tolerate metadata lines
//! anywhere before the header.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("missing header row in {0}")]
    MissingHeader(String),
    #[error("column {0:?} not found; available: {1:?}")]
    MissingColumn(String, Vec<String>),
    #[error("row {0} has {1} fields, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error("row {0}, column {1}: cannot parse {2:?} as a number")]
    BadNumber(usize, String, String),
}

/// In-memory numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// `#`-prefixed lines, stored without the prefix.
    pub metadata: Vec<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) {
        self.metadata.push(line.into());
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize, CsvError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CsvError::MissingColumn(name.into(), self.headers.clone()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CsvError> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Serialize; metadata first, then header, then rows. The shortest
    /// round-trip-exact float formatting keeps bodies byte-stable.
    pub fn to_string(&self) -> String {
        let mut s = String::new();
        for m in &self.metadata {
            s.push_str("# ");
            s.push_str(m);
            s.push('\n');
        }
        s.push_str(&self.headers.join(","));
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }

    /// The deterministic part: header plus rows, without metadata.
    pub fn body(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.headers.join(","));
        s.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CsvError> {
        write_atomic(path, self.to_string().as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CsvError> {
        Self::parse(&fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CsvError> {
        let mut metadata = Vec::new();
        let mut headers: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                metadata.push(rest.trim_start().to_string());
                continue;
            }
            match &headers {
                None => headers = Some(trimmed.split(',').map(|s| s.trim().to_string()).collect()),
                Some(h) => {
                    let fields: Vec<&str> = trimmed.split(',').collect();
                    if fields.len() != h.len() {
                        return Err(CsvError::RaggedRow(lineno + 1, fields.len(), h.len()));
                    }
                    let mut row = Vec::with_capacity(fields.len());
                    for (f, name) in fields.iter().zip(h) {
                        let v: f64 = f.trim().parse().map_err(|_| {
                            CsvError::BadNumber(lineno + 1, name.clone(), f.to_string())
                        })?;
                        row.push(v);
                    }
                    rows.push(row);
                }
            }
        }
        let headers = headers.ok_or_else(|| CsvError::MissingHeader(origin.into()))?;
        Ok(Self { metadata, headers, rows })
    }
}

/// Shortest representation that parses back to the same f64.
pub fn format_float(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // integers print without an exponent or trailing fraction
        format!("{v}")
    } else {
        let s = format!("{v}");
        debug_assert!(s.parse::<f64>().map(|p| p.to_bits() == v.to_bits()).unwrap_or(false));
        s
    }
}

/// Write via a temp file in the same directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile_path(path);
    let mut attempts = 0;
    let mut file = loop {
        match fs::OpenOptions::new().write(true).create_new(true).open(&tmp) {
            Ok(f) => break f,
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists && attempts < 16 => {
                attempts += 1;
                tmp = tempfile_path(path);
            }
            Err(e) => return Err(e),
        }
    };
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, path)
}

fn tempfile_path(path: &Path) -> std::path::PathBuf {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nonce = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.subsec_nanos())
        .unwrap_or(0);
    let pid = std::process::id();
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    path.with_file_name(format!(".{name}.{pid}.{nonce}.tmp"))
}
