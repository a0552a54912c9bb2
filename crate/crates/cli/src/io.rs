//! File formats: JSON documents, headed CSV tables, case files with CSV side data.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use ccopt_core::model::SampleSet;
use ccopt_dispatch::{BoundarySample, DispatchCase};

/// Parses `path` as JSON; errors carry the JSON pointer of the offending field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_json(&text).with_context(|| format!("invalid JSON document {}", path.display()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(&e.path().to_string());
        anyhow::anyhow!("at {pointer}: {}", e.inner())
    })
}

/// `network.lines[2].capacity` → `/network/lines/2/capacity`.
fn pointer_of(path: &str) -> String {
    if path == "." {
        return "/".into();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let mut rest = part;
        while let Some(open) = rest.find('[') {
            if open > 0 {
                out.push('/');
                out.push_str(&rest[..open]);
            }
            let close = rest[open..].find(']').map_or(rest.len(), |c| open + c);
            out.push('/');
            out.push_str(&rest[open + 1..close]);
            rest = rest.get(close + 1..).unwrap_or("");
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Headed numeric table, one scenario per row.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: malformed row {}", path.display(), i + 1))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .with_context(|| format!("{}: row {}, column {}: `{v}` is not a finite number", path.display(), i + 1, j + 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    SampleSet::new(read_rows(path)?).with_context(|| format!("invalid scenario file {}", path.display()))
}

/// Writes `rows` under `header`; numbers use the shortest round-trip decimal form.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            bail!("internal: row width {} differs from header width {}", r.len(), header.len());
        }
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let dim = rows.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..dim).map(|j| format!("xi_{j}")).collect();
    let body: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|v| num(*v)).collect()).collect();
    write_table(path, &header, &body)
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn boundaries(path: &Path, horizon: usize) -> Result<Vec<BoundarySample>> {
    read_rows(path)?
        .iter()
        .enumerate()
        .map(|(i, r)| BoundarySample::from_row(r, horizon).with_context(|| format!("{}: row {}", path.display(), i + 1)))
        .collect()
}

/// Loads a case file, pulls in referenced CSV scenario data and validates it.
pub fn load_case(path: &Path) -> Result<DispatchCase> {
    let mut case: DispatchCase = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let t = case.horizon;
    if let Some(f) = case.wind.errors_csv.take() {
        if !case.wind.errors.is_empty() {
            bail!("{}: at /wind: give either errors or errors_csv, not both", path.display());
        }
        case.wind.errors = read_rows(&resolve(base, &f))?;
    }
    if let Some(f) = case.wind.test_errors_csv.take() {
        case.wind.test_errors = read_rows(&resolve(base, &f))?;
    }
    for (d, adn) in case.adns.iter_mut().enumerate() {
        if let Some(f) = adn.boundary_csv.take() {
            if !adn.boundary_samples.is_empty() {
                bail!("{}: at /adns/{d}: give either boundary_samples or boundary_csv, not both", path.display());
            }
            adn.boundary_samples = boundaries(&resolve(base, &f), t)?;
        }
        if let Some(f) = adn.test_boundary_csv.take() {
            adn.test_boundary_samples = boundaries(&resolve(base, &f), t)?;
        }
    }
    case.validate().with_context(|| format!("invalid case file {}", path.display()))?;
    Ok(case)
}
