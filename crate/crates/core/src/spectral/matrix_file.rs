//! Dense matrix and weight files: CSV text (`.csv`, `.txt`) or raw little-endian
//! `f64` binary, both row-major.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn is_text(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("csv") | Some("txt")
    )
}

/// Reads all values in file order.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    if is_text(path) {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
        let mut out = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            for field in record.iter().filter(|f| !f.is_empty()) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: row {}: `{field}` is not a number",
                        path.display(),
                        row + 1
                    ))
                })?;
                out.push(v);
            }
        }
        Ok(out)
    } else {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Data(format!(
                "{}: binary length {} is not a multiple of 8",
                path.display(),
                bytes.len()
            )));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

/// Reads a square row-major matrix; the dimension is inferred from the value count.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let values = read_values(path)?;
    let n = (values.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != values.len() {
        return Err(Error::Data(format!(
            "{}: {} values do not form a square matrix",
            path.display(),
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, &values))
}

/// Writes a matrix as raw little-endian row-major `f64`.
pub fn write_matrix_binary(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(m.len() * 8);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
