//! CSV tables and wavefield snapshots.
//!
//! Numbers are written with 17 significant digits so that reading a file
//! back yields bit-identical `f64` values. Lines starting with `#` are
//! comments; the first non-comment line of a table is its column header.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Lossless decimal form of an `f64`.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

fn parse_f64(text: &str, line: usize) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("`{}` is not a number", text.trim()),
    })
}

/// A comma-separated table with optional `#` comment lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(mut self, text: impl Into<String>) -> Self {
        self.comments.push(text.into());
        self
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push_row(values.iter().map(|v| format_f64(*v)).collect());
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing column `{name}`") })
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        let first_row_line = self.comments.len() + 2;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| parse_f64(&row[idx], first_row_line + i))
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Table::default();
        let mut have_header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if let Some(comment) = raw.strip_prefix('#') {
                if have_header {
                    return Err(Error::Parse { line, message: "comment after header".into() });
                }
                table.comments.push(comment.strip_prefix(' ').unwrap_or(comment).to_string());
                continue;
            }
            if raw.is_empty() {
                continue;
            }
            let cells: Vec<String> = raw.split(',').map(str::to_string).collect();
            if !have_header {
                table.columns = cells;
                have_header = true;
            } else if cells.len() != table.columns.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", table.columns.len(), cells.len()),
                });
            } else {
                table.rows.push(cells);
            }
        }
        if !have_header {
            return Err(Error::Parse { line: text.lines().count().max(1), message: "missing column header".into() });
        }
        Ok(table)
    }
}

pub fn write_csv(path: impl AsRef<Path>, table: &Table) -> Result<()> {
    fs::write(path, table.to_csv_string())?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
    Table::parse(&fs::read_to_string(path)?)
}

/// One field on a regular grid at one time: `nz` rows of `nx` values, row
/// `j` at constant depth `j·dz` (z increasing downward), `x` increasing
/// along each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub t: f64,
    pub field: String,
    /// Row-major, `data[j * nx + i]`.
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `<field>_t<ms>.csv`, with the time rounded to whole milliseconds.
    pub fn file_name(&self) -> String {
        snapshot_file_name(&self.field, self.t)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "# nx={},nz={},dx={},dz={},t={},field={}\n",
            self.nx, self.nz, self.dx, self.dz, self.t, self.field
        );
        for row in self.data.chunks(self.nx.max(1)) {
            let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix("# "))
            .ok_or_else(|| Error::Parse { line: 1, message: "missing `# nx=...` header".into() })?;
        let mut nx = None;
        let mut nz = None;
        let mut dx = None;
        let mut dz = None;
        let mut t = None;
        let mut field = None;
        for pair in header.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: 1, message: format!("malformed header entry `{pair}`") })?;
            let bad = || Error::Parse { line: 1, message: format!("bad value for `{key}`") };
            match key {
                "nx" => nx = Some(value.parse::<usize>().map_err(|_| bad())?),
                "nz" => nz = Some(value.parse::<usize>().map_err(|_| bad())?),
                "dx" => dx = Some(value.parse::<f64>().map_err(|_| bad())?),
                "dz" => dz = Some(value.parse::<f64>().map_err(|_| bad())?),
                "t" => t = Some(value.parse::<f64>().map_err(|_| bad())?),
                "field" => field = Some(value.to_string()),
                _ => return Err(Error::Parse { line: 1, message: format!("unknown header key `{key}`") }),
            }
        }
        let missing = |k: &str| Error::Parse { line: 1, message: format!("header lacks `{k}`") };
        let nx = nx.ok_or_else(|| missing("nx"))?;
        let nz = nz.ok_or_else(|| missing("nz"))?;
        let mut data = Vec::with_capacity(nx * nz);
        let mut rows = 0;
        for (i, raw) in lines.enumerate() {
            let line = i + 2;
            if raw.is_empty() {
                continue;
            }
            let cells: Vec<&str> = raw.split(',').collect();
            if cells.len() != nx {
                return Err(Error::Parse { line, message: format!("expected {nx} values, found {}", cells.len()) });
            }
            for c in cells {
                data.push(parse_f64(c, line)?);
            }
            rows += 1;
        }
        if rows != nz {
            return Err(Error::Parse {
                line: rows + 1,
                message: format!("expected {nz} rows, found {rows}"),
            });
        }
        Ok(Self {
            nx,
            nz,
            dx: dx.ok_or_else(|| missing("dx"))?,
            dz: dz.ok_or_else(|| missing("dz"))?,
            t: t.ok_or_else(|| missing("t"))?,
            field: field.ok_or_else(|| missing("field"))?,
            data,
        })
    }
}

pub fn snapshot_file_name(field: &str, t: f64) -> String {
    format!("{field}_t{}.csv", (t * 1000.0).round() as i64)
}

/// Writes the snapshot into `dir` under its canonical file name.
pub fn write_snapshot(dir: impl AsRef<Path>, snapshot: &Snapshot) -> Result<std::path::PathBuf> {
    let path = dir.as_ref().join(snapshot.file_name());
    fs::write(&path, snapshot.to_csv_string())?;
    Ok(path)
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    Snapshot::parse(&fs::read_to_string(path)?)
}
