//! CSV ingestion and emission, plus the roles-file format.
//!
//! Roles files hold one `column=role` assignment per line, where role is one
//! of `qi`, `confidential` or `ignore`. Blank lines and lines starting with
//! `#` are skipped.

use std::fs::File;
use std::path::Path;

use crate::dataset::{AttributeSpec, Role, Table};
use crate::error::{Error, Result};
use crate::partition::AnonymizedTable;

/// Name of the trailing column carrying cluster ids in anonymized output.
pub const CLUSTER_ID_COLUMN: &str = "cluster_id";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn parse_roles(text: &str) -> Result<Vec<AttributeSpec>> {
    let mut specs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, role) = line
            .split_once('=')
            .ok_or_else(|| Error::Roles(format!("line {}: expected `column=role`", lineno + 1)))?;
        let role = Role::parse(role)
            .ok_or_else(|| Error::Roles(format!("line {}: unknown role `{}`", lineno + 1, role.trim())))?;
        specs.push(AttributeSpec::new(name.trim(), role));
    }
    Ok(specs)
}

pub fn load_roles(path: impl AsRef<Path>) -> Result<Vec<AttributeSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_roles(&text)
}

pub fn format_roles(specs: &[AttributeSpec]) -> String {
    specs
        .iter()
        .map(|s| format!("{}={}\n", s.name, s.role.keyword()))
        .collect()
}

struct RawTable {
    specs: Vec<AttributeSpec>,
    rows: Vec<Vec<f64>>,
    cluster_ids: Option<Vec<usize>>,
}

fn read_raw(path: &Path, roles: &[AttributeSpec], drop_missing: bool, with_cluster_ids: bool) -> Result<RawTable> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if with_cluster_ids {
        if header.last().map(String::as_str) != Some(CLUSTER_ID_COLUMN) {
            return Err(Error::MissingColumn(CLUSTER_ID_COLUMN.into()));
        }
        header.pop();
    }
    let mut specs = Vec::with_capacity(header.len());
    for name in &header {
        let spec = roles
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
        specs.push(spec.clone());
    }
    if let Some(missing) = roles.iter().find(|s| !header.contains(&s.name)) {
        return Err(Error::MissingColumn(missing.name.clone()));
    }

    let width = header.len();
    let mut rows = Vec::new();
    let mut ids = Vec::new();
    'records: for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        let expected = width + usize::from(with_cluster_ids);
        if record.len() != expected {
            return Err(Error::RowWidth {
                row: row_no,
                found: record.len(),
                expected,
            });
        }
        let mut row = Vec::with_capacity(width);
        for (j, cell) in record.iter().take(width).enumerate() {
            if cell.is_empty() {
                if drop_missing {
                    continue 'records;
                }
                return Err(Error::MissingValue {
                    row: row_no,
                    column: header[j].clone(),
                });
            }
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: row_no,
                    column: header[j].clone(),
                    value: cell.to_string(),
                })?;
            row.push(value);
        }
        if with_cluster_ids {
            let cell = &record[width];
            let id = cell.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: CLUSTER_ID_COLUMN.into(),
                value: cell.to_string(),
            })?;
            ids.push(id);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::NoSurvivingRows);
    }
    Ok(RawTable {
        specs,
        rows,
        cluster_ids: with_cluster_ids.then_some(ids),
    })
}

/// Loads a table whose header columns are all named in `roles`.
///
/// With `drop_missing`, records with a blank cell are skipped; otherwise a
/// blank cell is an error naming its (1-based) data row.
pub fn load_csv(path: impl AsRef<Path>, roles: &[AttributeSpec], drop_missing: bool) -> Result<Table> {
    let raw = read_raw(path.as_ref(), roles, drop_missing, false)?;
    Table::new(raw.specs, raw.rows)
}

/// Loads an anonymized release written by [`write_anonymized_csv`].
pub fn load_anonymized_csv(path: impl AsRef<Path>, roles: &[AttributeSpec]) -> Result<AnonymizedTable> {
    let raw = read_raw(path.as_ref(), roles, false, true)?;
    let table = Table::new(raw.specs, raw.rows)?;
    Ok(AnonymizedTable::new(table, raw.cluster_ids.unwrap_or_default()))
}

fn write_rows(
    path: &Path,
    header: impl IntoIterator<Item = String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header)?;
    let mut count = 0usize;
    for row in rows {
        writer.write_record(row)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyTable);
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

// `{}` on f64 prints the shortest representation that parses back to the same bits.
fn fmt_row(row: &[f64]) -> Vec<String> {
    row.iter().map(|v| format!("{v}")).collect()
}

pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    write_rows(
        path.as_ref(),
        table.specs().iter().map(|s| s.name.clone()),
        table.rows().iter().map(|r| fmt_row(r)),
    )
}

/// Writes the release with a trailing `cluster_id` column.
pub fn write_anonymized_csv(anon: &AnonymizedTable, path: impl AsRef<Path>) -> Result<()> {
    let header = anon
        .table()
        .specs()
        .iter()
        .map(|s| s.name.clone())
        .chain(std::iter::once(CLUSTER_ID_COLUMN.to_string()));
    write_rows(
        path.as_ref(),
        header,
        anon.table().rows().iter().zip(anon.cluster_ids()).map(|(r, id)| {
            let mut cells = fmt_row(r);
            cells.push(id.to_string());
            cells
        }),
    )
}
