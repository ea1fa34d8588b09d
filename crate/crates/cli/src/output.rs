//! CSV and JSON emission. Every float is written with 17 significant digits
//! so that values survive a write/read cycle bit for bit.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{CliError, Result};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Compact JSON layout with fixed-width floats; non-finite values become `null`.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    value
        .serialize(&mut serde_json::Serializer::with_formatter(&mut buf, FixedDigits))
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Rows of floats under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory cannot fail");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v)))
                .expect("writing to memory cannot fail");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ASCII output")
    }

    pub fn from_csv_reader<R: io::Read>(r: R, source: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let bad = |msg: String| CliError::Config(format!("{}: {msg}", source.display()));
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header: Vec<String> = rd
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| bad(format!("row {}: `{f}` is not a number", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok((header, rows))
    }
}

/// Writes `contents` to `dir/name`, creating `dir`. A failed write leaves no
/// file behind.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    let res = File::create(&path).and_then(|f| {
        let mut w = BufWriter::new(f);
        w.write_all(contents.as_bytes())?;
        w.flush()
    });
    if let Err(e) = res {
        let _ = std::fs::remove_file(&path);
        return Err(CliError::io(path, e));
    }
    Ok(path)
}
