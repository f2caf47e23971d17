//! Reading series from CSV and the pre-test transforms.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Which CSV column to read: a header name or a 0-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnSelector {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CliError::InvalidArgument("empty column selector".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

/// Parses one numeric column out of CSV text.
///
/// Selecting by name requires a header row. Otherwise the first row is
/// treated as a header exactly when its selected field is not a number.
/// Unparseable cells anywhere else are errors, never skipped.
pub fn parse_csv<R: Read>(reader: R, column: Option<&ColumnSelector>) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = rdr.records();
    let Some(first) = records.next().transpose()? else {
        return Err(CliError::EmptySeries);
    };
    let mut values = Vec::new();
    let (index, label) = match column {
        Some(ColumnSelector::Name(name)) => {
            let idx = first
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::UnknownColumn(name.clone()))?;
            (idx, name.clone())
        }
        other => {
            let idx = match other {
                Some(ColumnSelector::Index(i)) => *i,
                _ => 0,
            };
            let cell = first
                .get(idx)
                .ok_or_else(|| CliError::UnknownColumn(idx.to_string()))?;
            if let Ok(v) = cell.parse::<f64>() {
                values.push(v);
            }
            let label = match other {
                Some(_) => idx.to_string(),
                None if cell.parse::<f64>().is_err() => cell.to_string(),
                None => "0".to_string(),
            };
            (idx, label)
        }
    };
    for rec in records {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let cell = rec.get(index).unwrap_or("");
        let v: f64 = cell.parse().map_err(|_| CliError::Parse {
            row,
            column: label.clone(),
            text: cell.to_string(),
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::EmptySeries);
    }
    Ok(values)
}

/// Reads a series from a CSV file, or from stdin when `path` is `-`.
pub fn ingest_csv(path: &str, column: Option<&ColumnSelector>) -> Result<Vec<f64>> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(CliError::io("<stdin>"))?;
        return parse_csv(buf.as_slice(), column);
    }
    let p = Path::new(path);
    if !p.exists() {
        return Err(CliError::FileNotFound(p.to_path_buf()));
    }
    let file = std::fs::File::open(p).map_err(CliError::io(path))?;
    parse_csv(std::io::BufReader::new(file), column)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    #[default]
    None,
    LogReturns,
    Diff,
}

impl FromStr for Transform {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Transform::None),
            "log-returns" | "logreturns" => Ok(Transform::LogReturns),
            "diff" => Ok(Transform::Diff),
            other => Err(CliError::InvalidArgument(format!(
                "unknown transform '{other}' (expected none, log-returns or diff)"
            ))),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::None => "none",
            Transform::LogReturns => "log-returns",
            Transform::Diff => "diff",
        })
    }
}

impl Transform {
    pub fn apply(self, series: &[f64]) -> Result<Vec<f64>> {
        match self {
            Transform::None => Ok(series.to_vec()),
            Transform::LogReturns => log_returns(series),
            Transform::Diff => Ok(diff(series)),
        }
    }
}

/// `log(x[t+1]) - log(x[t])`.
pub fn log_returns(series: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = series.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(CliError::NonPositiveValue { index, value });
    }
    Ok(series.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

pub fn diff(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}
