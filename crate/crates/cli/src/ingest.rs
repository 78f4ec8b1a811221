//! CSV ingestion of projected positions or squared radii.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use stereoboot_core::SquaredRadiusSample;

use crate::config::{Columns, Recenter};
use crate::error::{CliError, CliResult};

/// How many offending rows an ingestion error spells out.
const LISTED_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample: SquaredRadiusSample,
    pub rows: usize,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub columns: Columns,
    pub recenter: Recenter,
    pub max_rejected: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { columns: Columns::Auto, recenter: Recenter::None, max_rejected: 0 }
    }
}

pub fn ingest(path: &Path, options: &IngestOptions) -> CliResult<Dataset> {
    let file = File::open(path).map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
    ingest_reader(file, options)
}

enum Layout {
    Positions(usize, usize),
    Radii(usize),
}

fn resolve_layout(headers: &csv::StringRecord, columns: &Columns) -> CliResult<Layout> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Ingest(format!("missing column '{name}'")))
    };
    match columns {
        Columns::Radii(y) => Ok(Layout::Radii(find(y)?)),
        Columns::Positions(a, b) => Ok(Layout::Positions(find(a)?, find(b)?)),
        Columns::Auto => match find("y") {
            Ok(y) => Ok(Layout::Radii(y)),
            Err(_) => match (find("x1"), find("x2")) {
                (Ok(a), Ok(b)) => Ok(Layout::Positions(a, b)),
                _ => Err(CliError::Ingest("header names neither 'y' nor 'x1,x2'".into())),
            },
        },
    }
}

fn parse_field(record: &csv::StringRecord, idx: usize) -> Result<f64, String> {
    let raw = record.get(idx).ok_or_else(|| format!("missing field {}", idx + 1))?.trim();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("cannot parse '{raw}' as a finite number")),
    }
}

fn centre(values: &[f64], how: Recenter) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    match how {
        Recenter::None => 0.0,
        Recenter::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Recenter::Median => {
            let mut v = values.to_vec();
            v.sort_by(f64::total_cmp);
            let m = v.len() / 2;
            if v.len() % 2 == 1 {
                v[m]
            } else {
                0.5 * (v[m - 1] + v[m])
            }
        }
    }
}

pub fn ingest_reader<R: Read>(reader: R, options: &IngestOptions) -> CliResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::Ingest(format!("cannot read header: {e}")))?.clone();
    let layout = resolve_layout(&headers, &options.columns)?;
    if matches!(layout, Layout::Radii(_)) && options.recenter != Recenter::None {
        return Err(CliError::Ingest("recentering needs position columns".into()));
    }

    let mut rejected = Vec::new();
    let mut parsed: Vec<(u64, f64, f64)> = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        rows += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                rejected.push(RejectedRow { line, reason: e.to_string() });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let fields = match layout {
            Layout::Radii(y) => parse_field(&record, y).map(|v| (v, f64::NAN)),
            Layout::Positions(a, b) => parse_field(&record, a).and_then(|u| Ok((u, parse_field(&record, b)?))),
        };
        match fields {
            Ok((u, v)) => parsed.push((line, u, v)),
            Err(reason) => rejected.push(RejectedRow { line, reason }),
        }
    }

    let squared: Vec<(u64, f64)> = match layout {
        Layout::Radii(_) => parsed.iter().map(|&(l, y, _)| (l, y)).collect(),
        Layout::Positions(..) => {
            let xs: Vec<f64> = parsed.iter().map(|p| p.1).collect();
            let ys: Vec<f64> = parsed.iter().map(|p| p.2).collect();
            let (cx, cy) = (centre(&xs, options.recenter), centre(&ys, options.recenter));
            parsed.iter().map(|&(l, a, b)| (l, (a - cx).powi(2) + (b - cy).powi(2))).collect()
        }
    };
    let mut values = Vec::with_capacity(squared.len());
    for (line, y) in squared {
        if y > 0.0 && y.is_finite() {
            values.push(y);
        } else {
            rejected.push(RejectedRow { line, reason: format!("squared radius {y} is not positive") });
        }
    }
    rejected.sort_by_key(|r| r.line);

    for r in &rejected {
        log::warn!("line {}: {}", r.line, r.reason);
    }
    if rejected.len() > options.max_rejected {
        let listed: Vec<String> =
            rejected.iter().take(LISTED_ROWS).map(|r| format!("line {}: {}", r.line, r.reason)).collect();
        let more = rejected.len().saturating_sub(LISTED_ROWS);
        let tail = if more > 0 { format!("; and {more} more") } else { String::new() };
        return Err(CliError::Ingest(format!(
            "{} rejected rows exceed the limit of {}: {}{tail}",
            rejected.len(),
            options.max_rejected,
            listed.join("; ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Ingest("no usable rows".into()));
    }
    let sample = SquaredRadiusSample::new(values).map_err(|e| CliError::Ingest(e.to_string()))?;
    Ok(Dataset { sample, rows, rejected })
}
