//! Minimal tab-separated table reading and writing.
//!
//! Lines starting with `#` are provenance comments and are skipped on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    /// `(line number, fields)`; line numbers are 1-based.
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut header = None;
        let mut rows = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if header.is_none() {
                header = Some(fields);
                continue;
            }
            let width = header.as_ref().map_or(0, Vec::len);
            if fields.len() != width {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: i + 1,
                    msg: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            rows.push((i + 1, fields));
        }
        let header = header.ok_or_else(|| Error::Parse {
            path: path.to_owned(),
            line: 0,
            msg: "empty table".into(),
        })?;
        Ok(Self {
            path: path.to_owned(),
            header,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                path: self.path.clone(),
                line: 1,
                msg: format!("missing column '{name}'"),
            })
    }

    pub fn parse<T: std::str::FromStr>(&self, line: usize, field: &str) -> Result<T> {
        field.parse().map_err(|_| Error::Parse {
            path: self.path.clone(),
            line,
            msg: format!("cannot parse '{field}'"),
        })
    }
}

/// Writes a table with optional leading `# ` comment lines.
pub fn write_table(
    path: impl AsRef<Path>,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| -> std::io::Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", header.join("\t"))?;
        for row in rows {
            writeln!(w, "{}", row.join("\t"))?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// Formats a float so that it parses back to the identical value.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else {
        format!("{x:?}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_f64)
}

pub fn parse_opt(s: &str) -> Option<f64> {
    if s == "NA" {
        None
    } else {
        s.parse().ok()
    }
}
