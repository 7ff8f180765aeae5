//! Comma-separated ingestion: header row, all cells numeric, one column
//! designated as the response.

use std::path::Path;

use oem_core::{solver::standardize_columns, Matrix};

use crate::error::CliError;

/// A loaded regression problem.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Predictor names in header order.
    pub column_names: Vec<String>,
    pub response_name: String,
    /// Column norms divided out by [`Dataset::standardize`]; multiplying the
    /// stored columns back by these factors recovers the input.
    pub standardization: Option<Vec<f64>>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Rescales every predictor column to unit sum of squares, recording the
    /// factors.
    pub fn standardize(&self) -> Result<Dataset, CliError> {
        let (x, s) = standardize_columns(&self.x).map_err(|e| match e {
            oem_core::OemError::ZeroColumn(j) => CliError::ZeroColumn {
                name: self.column_names[j].clone(),
            },
            other => CliError::Core(other),
        })?;
        Ok(Dataset {
            x,
            y: self.y.clone(),
            column_names: self.column_names.clone(),
            response_name: self.response_name.clone(),
            standardization: Some(s),
        })
    }
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<RawTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| map_csv_error(path, e, 0))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| map_csv_error(path, e, 0))?
        .iter()
        .map(String::from)
        .collect();

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let data_row = idx + 1;
        let record = record.map_err(|e| map_csv_error(path, e, data_row))?;
        let mut row = Vec::with_capacity(header.len());
        for (j, field) in record.iter().enumerate() {
            let column = header
                .get(j)
                .cloned()
                .unwrap_or_else(|| format!("#{}", j + 1));
            let value: f64 = field.parse().map_err(|_| CliError::NonNumericCell {
                row: data_row,
                column: column.clone(),
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(CliError::NonFiniteCell {
                    row: data_row,
                    column,
                });
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::NoDataRows);
    }
    Ok(RawTable { header, rows })
}

fn map_csv_error(path: &Path, e: csv::Error, data_row: usize) -> CliError {
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => CliError::RaggedRow {
            row: data_row,
            expected: *expected_len as usize,
            found: *len as usize,
        },
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io {
                path: path.display().to_string(),
                source: io,
            },
            _ => unreachable!(),
        },
        _ => CliError::BadRequest(format!("{}: {e}", path.display())),
    }
}

/// Loads a dataset, taking the named column as the response and all other
/// columns, in header order, as predictors.
pub fn load_dataset(path: &Path, response_column: &str) -> Result<Dataset, CliError> {
    let table = read_table(path)?;
    let response_idx = table
        .header
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| CliError::MissingResponse {
            name: response_column.to_string(),
            available: table.header.join(", "),
        })?;

    let n = table.rows.len();
    let p = table.header.len() - 1;
    if p == 0 {
        return Err(CliError::BadRequest(
            "file holds only the response column".into(),
        ));
    }
    let mut data = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for row in &table.rows {
        for (j, v) in row.iter().enumerate() {
            if j == response_idx {
                y.push(*v);
            } else {
                data.push(*v);
            }
        }
    }
    let column_names: Vec<String> = table
        .header
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != response_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let x = Matrix::new(n, p, data).map_err(CliError::Core)?;
    Ok(Dataset {
        x,
        y,
        column_names,
        response_name: response_column.to_string(),
        standardization: None,
    })
}

/// Loads the whole file as a matrix, optionally dropping one named column
/// (used by the orthogonalize command, which has no response).
pub fn load_matrix(
    path: &Path,
    drop_column: Option<&str>,
) -> Result<(Matrix, Vec<String>), CliError> {
    match drop_column {
        Some(name) => {
            let d = load_dataset(path, name)?;
            Ok((d.x, d.column_names))
        }
        None => {
            let table = read_table(path)?;
            let n = table.rows.len();
            let p = table.header.len();
            let mut data = Vec::with_capacity(n * p);
            for row in &table.rows {
                data.extend_from_slice(row);
            }
            let x = Matrix::new(n, p, data).map_err(CliError::Core)?;
            Ok((x, table.header))
        }
    }
}
