//! Matrix files: the `.lplr` binary format and headerless CSV.
//!
//! Binary layout (little endian, no padding):
//!
//! | bytes | content            |
//! |-------|--------------------|
//! | 4     | magic `LPLR`       |
//! | 4     | version `u32` = 1  |
//! | 8     | rows `u64`         |
//! | 8     | cols `u64`         |
//! | 8·r·c | `f64` row-major    |

use std::fs;
use std::path::Path;

use lplr_core::DenseMatrix;

pub const MAGIC: &[u8; 4] = b"LPLR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, offset {offset}: {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("header declares {declared} values but the payload holds {actual}")]
    HeaderMismatch { declared: u64, actual: u64 },
    #[error(transparent)]
    Matrix(#[from] lplr_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// `.csv` files are CSV; everything else is binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

fn parse_err(line: usize, offset: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        offset,
        message: message.into(),
    }
}

pub fn encode_binary(a: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for v in a.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Binary errors report `line` 0 and the byte offset of the problem.
pub fn decode_binary(bytes: &[u8]) -> Result<DenseMatrix, IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(parse_err(0, bytes.len(), "truncated header"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(parse_err(0, 0, "bad magic, expected LPLR"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(parse_err(0, 4, format!("unsupported version {version}")));
    }
    let (rows, cols) = (u64_at(8), u64_at(16));
    let declared = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err(0, 8, "rows * cols overflows"))?;
    let payload = (bytes.len() - HEADER_LEN) as u64;
    if !payload.is_multiple_of(8) {
        return Err(parse_err(
            0,
            bytes.len(),
            "payload is not a whole number of f64 values",
        ));
    }
    let actual = payload / 8;
    if actual < declared {
        return Err(parse_err(
            0,
            bytes.len(),
            format!("truncated payload: {actual} of {declared} values"),
        ));
    }
    if actual > declared {
        return Err(IoError::HeaderMismatch { declared, actual });
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DenseMatrix::new(rows as usize, cols as usize, data)?)
}

/// Shortest round-trip decimal form, so CSV files reload bit-exactly.
pub fn encode_csv(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Lines are 1-based; `offset` is the byte offset of the offending record.
pub fn decode_csv(text: &str) -> Result<DenseMatrix, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let (line, offset) = e
                .position()
                .map_or((0, 0), |p| (p.line() as usize, p.byte() as usize));
            parse_err(line, offset, e.to_string())
        })?;
        let pos = record.position().expect("reader records positions");
        let (line, offset) = (pos.line() as usize, pos.byte() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| {
                    parse_err(
                        line,
                        offset,
                        format!("field {} is not a number: {field:?}", j + 1),
                    )
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    line,
                    offset,
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 0, "no rows"));
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn load_matrix(path: &Path, format: Format) -> Result<DenseMatrix, IoError> {
    let io_err = |source| IoError::Io {
        path: path.display().to_string(),
        source,
    };
    match format {
        Format::Binary => decode_binary(&fs::read(path).map_err(io_err)?),
        Format::Csv => decode_csv(&fs::read_to_string(path).map_err(io_err)?),
    }
}

pub fn store_matrix(path: &Path, format: Format, a: &DenseMatrix) -> Result<(), IoError> {
    let bytes = match format {
        Format::Binary => encode_binary(a),
        Format::Csv => encode_csv(a).into_bytes(),
    };
    fs::write(path, bytes).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_example() {
        let a = decode_csv("1,2\n3,4").unwrap();
        assert_eq!(
            a,
            DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
        );
    }

    #[test]
    fn csv_errors_carry_positions() {
        match decode_csv("1,2\n3,x\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match decode_csv("1,2\n3,4\n5\n") {
            Err(IoError::Parse { line, offset, .. }) => assert_eq!((line, offset), (3, 8)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode_csv(""), Err(IoError::Parse { .. })));
    }

    #[test]
    fn binary_header_layout() {
        let a = DenseMatrix::from_rows(&[[1.5, -2.0, 0.0]]).unwrap();
        let b = encode_binary(&a);
        assert_eq!(b.len(), 24 + 24);
        assert_eq!(&b[..4], b"LPLR");
        assert_eq!(&b[4..8], &[1, 0, 0, 0]);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(b[24..32].try_into().unwrap()), 1.5);
    }

    #[test]
    fn binary_errors() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let good = encode_binary(&a);
        assert!(matches!(
            decode_binary(&good[..good.len() - 8]),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            decode_binary(&good[..10]),
            Err(IoError::Parse { .. })
        ));
        let mut extra = good.clone();
        extra.extend_from_slice(&0f64.to_le_bytes());
        assert!(matches!(
            decode_binary(&extra),
            Err(IoError::HeaderMismatch {
                declared: 4,
                actual: 5
            })
        ));
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            decode_binary(&bad_magic),
            Err(IoError::Parse { offset: 0, .. })
        ));
        let mut bad_version = good;
        bad_version[4] = 2;
        assert!(matches!(
            decode_binary(&bad_version),
            Err(IoError::Parse { offset: 4, .. })
        ));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("a.CSV")), Format::Csv);
        assert_eq!(Format::from_path(Path::new("a.lplr")), Format::Binary);
        assert_eq!(Format::from_path(Path::new("a")), Format::Binary);
    }
}
