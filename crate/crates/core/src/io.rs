//! Series ingestion from CSV and CSV/JSON serialization of paths.
//!
//! CSV dialect: comma separated, header row required, dot decimal.

use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::process::{Path, PathKind, PathMeta, Series};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl ColumnRef {
    /// A bare integer is an index unless a header has that exact name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    None,
    /// `log(p_t / p_{t-1})`
    Logret,
    /// `100 · log(p_t / p_{t-1})`
    LogretPct,
}

impl std::str::FromStr for Transform {
    type Err = DarwinError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Transform::None),
            "logret" => Ok(Transform::Logret),
            "logret_pct" => Ok(Transform::LogretPct),
            o => Err(DarwinError::InvalidArgument(format!("unknown transform '{o}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub path: PathBuf,
    pub column: ColumnRef,
    pub transform: Transform,
    pub drop_na: bool,
}

fn is_na(s: &str) -> bool {
    s.is_empty() || matches!(s.to_ascii_lowercase().as_str(), "na" | "nan" | "null" | "n/a")
}

/// Reads one numeric column. Row numbers in errors are 1-based file lines
/// (the header is line 1).
pub fn read_column<R: Read>(reader: R, column: &ColumnRef, drop_na: bool) -> Result<Vec<(usize, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = match column {
        ColumnRef::Name(name) => headers.iter().position(|h| h == name),
        ColumnRef::Index(i) => {
            let by_name = headers.iter().position(|h| h == i.to_string());
            by_name.or((*i < headers.len()).then_some(*i))
        }
    }
    .ok_or_else(|| DarwinError::MissingColumn(match column {
        ColumnRef::Name(n) => n.clone(),
        ColumnRef::Index(i) => format!("#{i}"),
    }))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec?;
        let cell = rec.get(idx).unwrap_or("");
        if is_na(cell) {
            if drop_na {
                continue;
            }
            return Err(DarwinError::Data { row, reason: "missing value".into() });
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| DarwinError::Data { row, reason: format!("non-numeric value '{cell}'") })?;
        if !v.is_finite() {
            return Err(DarwinError::Data { row, reason: format!("non-finite value '{cell}'") });
        }
        out.push((row, v));
    }
    Ok(out)
}

/// Applies `transform` to raw `(row, value)` pairs and builds a [`Series`].
pub fn transform_series(raw: &[(usize, f64)], transform: Transform) -> Result<Series> {
    let values = match transform {
        Transform::None => {
            if let Some(&(row, _)) = raw.iter().find(|(_, v)| *v == 0.0) {
                return Err(DarwinError::Data { row, reason: "zero value".into() });
            }
            raw.iter().map(|&(_, v)| v).collect()
        }
        Transform::Logret | Transform::LogretPct => {
            if let Some(&(row, v)) = raw.iter().find(|(_, v)| *v <= 0.0) {
                return Err(DarwinError::Data { row, reason: format!("nonpositive price {v} under log-return transform") });
            }
            let mult = if transform == Transform::LogretPct { 100.0 } else { 1.0 };
            let mut out = Vec::with_capacity(raw.len().saturating_sub(1));
            for w in raw.windows(2) {
                let r = mult * (w[1].1 / w[0].1).ln();
                if r == 0.0 {
                    return Err(DarwinError::Data { row: w[1].0, reason: "zero return".into() });
                }
                out.push(r);
            }
            out
        }
    };
    Series::new(values)
}

pub fn load_series(cfg: &IngestConfig) -> Result<Series> {
    let file = std::fs::File::open(&cfg.path)?;
    let raw = read_column(file, &cfg.column, cfg.drop_na)?;
    transform_series(&raw, cfg.transform)
}

/// Writes `t,sign,logabs,level`; `level` is empty when it is not a normal float.
pub fn write_path_csv<W: Write>(path: &Path, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "sign", "logabs", "level"])?;
    for t in 0..path.signs().len() {
        let level = path.level(t).map(|v| v.to_string()).unwrap_or_default();
        w.write_record([t.to_string(), path.signs()[t].to_string(), path.logabs()[t].to_string(), level])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a path written by [`write_path_csv`] (the `level` column is ignored).
pub fn read_path_csv<R: Read>(reader: R) -> Result<Path> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| DarwinError::MissingColumn(name.into()))
    };
    let (si, li) = (col("sign")?, col("logabs")?);
    let mut signs = Vec::new();
    let mut logabs = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let s: i8 = rec.get(si).unwrap_or("").parse().map_err(|_| DarwinError::Data { row, reason: "bad sign".into() })?;
        let l: f64 = rec.get(li).unwrap_or("").parse().map_err(|_| DarwinError::Data { row, reason: "bad logabs".into() })?;
        signs.push(s);
        logabs.push(l);
    }
    let y0 = logabs.first().map(|l: &f64| l.exp() * f64::from(signs[0])).unwrap_or(f64::NAN);
    Path::from_parts(signs, logabs, PathMeta { kind: PathKind::Darwin, params: None, spec: None, seed: None, y0 })
}

/// True when the CSV header has `sign` and `logabs` columns.
pub fn looks_like_path_csv(header_line: &str) -> bool {
    let cols: Vec<&str> = header_line.split(',').map(str::trim).collect();
    cols.contains(&"sign") && cols.contains(&"logabs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnvelope {
    pub meta: PathMeta,
    pub signs: Vec<i8>,
    pub logabs: Vec<f64>,
}

impl From<&Path> for PathEnvelope {
    fn from(p: &Path) -> Self {
        Self { meta: p.meta().clone(), signs: p.signs().to_vec(), logabs: p.logabs().to_vec() }
    }
}

impl PathEnvelope {
    pub fn into_path(self) -> Result<Path> {
        Path::from_parts(self.signs, self.logabs, self.meta)
    }
}

pub fn write_series_csv<W: Write>(series: &Series, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value"])?;
    for (t, v) in series.values().iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
