//! CSV ingestion and atomic output.

use std::io::Write;
use std::path::Path;

use specdens::SampledResponse;

use crate::error::{CliError, CliResult};

/// Reads a `t_ps,S[,sigma]` file into a response, sorted by time.
pub fn ingest_csv(path: &Path) -> CliResult<SampledResponse> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let label = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    parse_response(&text, &label)
}

/// Parses CSV text in the `t_ps,S[,sigma]` format.
pub fn parse_response(text: &str, label: &str) -> CliResult<SampledResponse> {
    let table = parse_table(text)?;
    let with_sigma = match table.header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["t_ps", "S"] => false,
        ["t_ps", "S", "sigma"] => true,
        other => {
            return Err(CliError::input(format!(
                "line 1: expected header 't_ps,S' or 't_ps,S,sigma', found '{}'",
                other.join(",")
            )))
        }
    };
    let mut times = Vec::with_capacity(table.rows.len());
    let mut values = Vec::with_capacity(table.rows.len());
    let mut sigma = with_sigma.then(Vec::new);
    for (line, row) in &table.rows {
        let cell =
            |i: usize| row[i].ok_or_else(|| CliError::input(format!("line {line}: empty cell in column {}", i + 1)));
        times.push(cell(0)?);
        values.push(cell(1)?);
        if let Some(s) = sigma.as_mut() {
            let v = cell(2)?;
            if !(v > 0.0) {
                return Err(CliError::input(format!("line {line}: sigma must be > 0, got {v}")));
            }
            s.push(v);
        }
    }
    Ok(SampledResponse::from_unsorted(times, values, sigma, label)?)
}

/// A numeric table: header names and rows with their 1-based line numbers.
/// Empty cells read as `None`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<Option<f64>>)>,
}

pub fn parse_table(text: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| CliError::input(format!("line 1: {e}")))?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::input("line 1: missing header"));
    }
    if header.iter().any(|h| h.parse::<f64>().is_ok()) {
        return Err(CliError::input(format!("line 1: missing header (found numeric row '{}')", header.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let cells = record
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some).ok_or_else(|| {
                    CliError::input(format!("line {line}, column {}: not a finite number: '{cell}'", i + 1))
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.push((line, cells));
    }
    Ok(Table { header, rows })
}

/// Formats a table as CSV with shortest round-trip decimals; `None` is an
/// empty cell.
pub fn format_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Option<f64>>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(|v| format!("{v:?}")).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::from(e.error))?;
            Ok(())
        }
    }
}
