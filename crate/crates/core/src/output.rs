//! CSV and JSON writers shared by the command-line front end.
//!
//! Every CSV starts with one `#` metadata line, then a header row. Numbers
//! are written with 12 significant digits in scientific notation so output
//! is byte-identical for identical inputs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Ordered `key=value` pairs for the metadata line.
#[derive(Clone, Debug, Default)]
pub struct Metadata {
    command: String,
    fields: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!("# relsr {VERSION} {}", self.command);
        for (k, v) in &self.fields {
            s.push(' ');
            s.push_str(k);
            s.push('=');
            s.push_str(v);
        }
        s
    }
}

/// Writes the metadata line, `header`, then each row of `columns` (all the
/// same length).
pub fn write_csv<W: Write>(mut w: W, meta: &Metadata, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    writeln!(w, "{}", meta.line())?;
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for r in 0..rows {
        line.clear();
        for (i, col) in columns.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_num(col[r]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

/// CSV to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(path: Option<&Path>, meta: &Metadata, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(format!("creating {}", p.display()), e))?;
            write_csv(BufWriter::new(file), meta, header, columns)
                .map_err(|e| Error::io(format!("writing {}", p.display()), e))
        }
        None => write_csv(io::stdout().lock(), meta, header, columns)
            .map_err(|e| Error::io("writing stdout", e)),
    }
}

/// `results/scan.csv` → `results/scan.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
