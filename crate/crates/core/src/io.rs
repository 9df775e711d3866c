//! Matrix files.
//!
//! CSV: rows are samples, columns are variables, a header row of variable
//! names is required and every cell must hold a finite number.
//!
//! Binary: the magic `FDPUMAT1`, then rows and columns as little-endian
//! `u64`, then `rows × cols` little-endian `f64` in row-major order.
//!
//! [`read_matrix`] and [`write_matrix`] pick the format from the file
//! extension: `.csv` or `.bin`.

use crate::{Error, Result};
use nalgebra::DMatrix;
use std::path::Path;

pub const BINARY_MAGIC: &[u8; 8] = b"FDPUMAT1";
const HEADER_LEN: usize = 24;

/// A matrix with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMatrix {
    pub names: Vec<String>,
    pub data: DMatrix<f64>,
}

/// Parses a CSV matrix. Row numbers in errors are 1-based file lines, so
/// the first data row is row 2; columns are 1-based.
pub fn parse_csv_matrix(bytes: &[u8]) -> Result<NamedMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(Some(1), None, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::parse(Some(1), None, "missing header row"));
    }
    let p = names.len();
    let mut values = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|pos| pos.line() as usize);
            Error::parse(line, None, e.to_string())
        })?;
        let line = record.position().map_or(rows + 2, |pos| pos.line() as usize);
        if record.len() != p {
            return Err(Error::parse(
                Some(line),
                None,
                format!("expected {p} fields, found {}", record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            values.push(parse_cell(field, line, c + 1)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::parse(None, None, "no data rows"));
    }
    Ok(NamedMatrix {
        names,
        data: DMatrix::from_row_slice(rows, p, &values),
    })
}

fn parse_cell(field: &str, row: usize, col: usize) -> Result<f64> {
    if field.is_empty() || field.eq_ignore_ascii_case("na") {
        return Err(Error::parse(Some(row), Some(col), "missing value"));
    }
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(Some(row), Some(col), format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(Some(row), Some(col), format!("non-finite value {field:?}")));
    }
    Ok(v)
}

/// Writes a CSV matrix; numbers use the shortest round-trip representation.
pub fn format_csv_matrix(m: &NamedMatrix) -> Result<Vec<u8>> {
    if m.names.len() != m.data.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} columns",
            m.names.len(),
            m.data.ncols()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&m.names).map_err(io)?;
    for row in m.data.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Default column names `v1, v2, ...`.
pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("v{j}")).collect()
}

pub fn encode_binary(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for row in m.row_iter() {
        for v in row.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse(None, None, "binary matrix shorter than its header"));
    }
    if &bytes[..8] != BINARY_MAGIC {
        return Err(Error::parse(None, None, "bad magic in binary matrix"));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(8), word(16));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::parse(None, None, format!("dimensions {rows}×{cols} overflow")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::parse(
            None,
            None,
            format!("{rows}×{cols} matrix needs {expected} data bytes, found {}", body.len()),
        ));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::parse(Some(i / cols + 1), Some(i % cols + 1), "non-finite value"));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(MatrixFormat::Csv),
            Some("bin") => Ok(MatrixFormat::Binary),
            _ => Err(Error::invalid(
                "path",
                format!("{}: unknown matrix format (expected .csv or .bin)", path.display()),
            )),
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<NamedMatrix> {
    let format = MatrixFormat::from_path(path)?;
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    match format {
        MatrixFormat::Csv => parse_csv_matrix(&bytes),
        MatrixFormat::Binary => {
            let data = decode_binary(&bytes)?;
            Ok(NamedMatrix {
                names: default_names(data.ncols()),
                data,
            })
        }
    }
}

pub fn write_matrix(path: &Path, m: &NamedMatrix) -> Result<()> {
    let bytes = match MatrixFormat::from_path(path)? {
        MatrixFormat::Csv => format_csv_matrix(m)?,
        MatrixFormat::Binary => encode_binary(&m.data),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a vector stored as a one-row or one-column matrix.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?.data;
    if m.nrows() == 1 || m.ncols() == 1 {
        Ok(m.iter().copied().collect())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}: expected a single row or column, got {}×{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(e: Error) -> (Option<usize>, Option<usize>) {
        match e {
            Error::Parse { row, col, .. } => (row, col),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_csv() {
        let m = parse_csv_matrix(b"a,b\n1,2.5\n-3e2, 4\n").unwrap();
        assert_eq!(m.names, vec!["a", "b"]);
        assert_eq!(m.data, DMatrix::from_row_slice(2, 2, &[1.0, 2.5, -300.0, 4.0]));
    }

    #[test]
    fn csv_errors_carry_coordinates() {
        assert_eq!(coords(parse_csv_matrix(b"a,b\n1,2\n3,\n").unwrap_err()), (Some(3), Some(2)));
        assert_eq!(coords(parse_csv_matrix(b"a,b\n1,NA\n").unwrap_err()), (Some(2), Some(2)));
        assert_eq!(coords(parse_csv_matrix(b"a,b\nx,2\n").unwrap_err()), (Some(2), Some(1)));
        assert_eq!(coords(parse_csv_matrix(b"a,b\n1,inf\n").unwrap_err()), (Some(2), Some(2)));
        assert_eq!(coords(parse_csv_matrix(b"a,b\n1,2\n3\n").unwrap_err()), (Some(3), None));
        assert!(parse_csv_matrix(b"").is_err());
        assert!(parse_csv_matrix(b"a,b\n").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let data = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2e-300, 5.0, f64::MAX, f64::MIN_POSITIVE]);
        let m = NamedMatrix {
            names: default_names(3),
            data,
        };
        assert_eq!(parse_csv_matrix(&format_csv_matrix(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn binary_round_trip_and_errors() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let bytes = encode_binary(&m);
        assert_eq!(bytes.len(), 24 + 48);
        // row-major layout
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2.0);
        assert_eq!(decode_binary(&bytes).unwrap(), m);
        assert!(decode_binary(&bytes[..30]).is_err());
        assert!(decode_binary(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_binary(&bad).is_err());
        let mut huge = bytes.clone();
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_binary(&huge).is_err());
        let mut nan = bytes;
        nan[64..72].copy_from_slice(&f64::NAN.to_le_bytes());
        assert_eq!(coords(decode_binary(&nan).unwrap_err()), (Some(2), Some(3)));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(MatrixFormat::from_path(Path::new("x.CSV")).unwrap(), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::from_path(Path::new("x.bin")).unwrap(), MatrixFormat::Binary);
        assert!(MatrixFormat::from_path(Path::new("x.txt")).is_err());
    }
}
