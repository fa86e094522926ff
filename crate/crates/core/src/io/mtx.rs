//! Matrix Market (`.mtx`) reader and writer.
//!
//! Supported: `matrix coordinate real general` (read into CSR) and
//! `matrix array real general` (read dense; entries are column-major).
//! `integer` fields are accepted as real.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{build_instance, MatrixData, PolytopeInstance, Storage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

fn parse_header(line: &str) -> Result<Layout> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    let tok = |k: usize| tokens.get(k).map(String::as_str);
    if tok(0) != Some("%%matrixmarket") {
        return Err(Error::parse(1, "first line must start with %%MatrixMarket"));
    }
    if tok(1) != Some("matrix") {
        return Err(Error::parse(1, format!("unsupported object {:?}", tok(1).unwrap_or(""))));
    }
    let layout = match tok(2) {
        Some("coordinate") => Layout::Coordinate,
        Some("array") => Layout::Array,
        other => return Err(Error::parse(1, format!("unsupported format {:?}", other.unwrap_or("")))),
    };
    match tok(3) {
        Some("real") | Some("integer") => {}
        other => return Err(Error::parse(1, format!("unsupported field {:?}", other.unwrap_or("")))),
    }
    match tok(4) {
        Some("general") => {}
        other => return Err(Error::parse(1, format!("unsupported symmetry {:?}", other.unwrap_or("")))),
    }
    if tokens.len() > 5 {
        return Err(Error::parse(1, "trailing tokens in header"));
    }
    Ok(layout)
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::parse(line, format!("bad value {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Parses Matrix Market text into a validated instance.
pub fn parse_matrix_market(text: &str) -> Result<PolytopeInstance> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let layout = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body.next().ok_or_else(|| Error::parse(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let want = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(Error::parse(size_line, format!("size line needs {want} integers")));
    }
    let m = parse_usize(dims[0], size_line, "row count")?;
    let n = parse_usize(dims[1], size_line, "column count")?;

    match layout {
        Layout::Coordinate => {
            let nnz = parse_usize(dims[2], size_line, "entry count")?;
            let mut triplets = Vec::with_capacity(nnz.min(1 << 16));
            let mut last_line = size_line;
            for (line, text) in body {
                if triplets.len() == nnz {
                    return Err(Error::parse(line, format!("more than {nnz} entries")));
                }
                let t: Vec<&str> = text.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(Error::parse(line, "coordinate entry needs `row col value`"));
                }
                let i = parse_usize(t[0], line, "row index")?;
                let j = parse_usize(t[1], line, "column index")?;
                if i == 0 || i > m || j == 0 || j > n {
                    return Err(Error::parse(line, format!("index ({i}, {j}) outside {m} x {n}")));
                }
                triplets.push((i - 1, j - 1, parse_value(t[2], line)?));
                last_line = line;
            }
            if triplets.len() != nnz {
                return Err(Error::parse(last_line, format!("expected {nnz} entries, found {}", triplets.len())));
            }
            build_instance(MatrixData::Triplets(triplets), m, n)
        }
        Layout::Array => {
            let total = m.checked_mul(n).ok_or_else(|| Error::parse(size_line, "matrix size overflows"))?;
            let mut column_major = Vec::with_capacity(total.min(1 << 16));
            let mut last_line = size_line;
            for (line, text) in body {
                for tok in text.split_whitespace() {
                    if column_major.len() == total {
                        return Err(Error::parse(line, format!("more than {total} entries")));
                    }
                    column_major.push(parse_value(tok, line)?);
                }
                last_line = line;
            }
            if column_major.len() != total {
                return Err(Error::parse(last_line, format!("expected {total} entries, found {}", column_major.len())));
            }
            let mut data = vec![0.0; total];
            for j in 0..n {
                for i in 0..m {
                    data[i * n + j] = column_major[j * m + i];
                }
            }
            build_instance(MatrixData::Dense(data), m, n)
        }
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<PolytopeInstance> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Dense instances are written as `array`, sparse ones as `coordinate`.
pub fn to_matrix_market(inst: &PolytopeInstance) -> String {
    let (m, n) = (inst.rows(), inst.cols());
    let mut out = String::new();
    match inst.storage() {
        Storage::Dense(data) => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            out.push_str(&format!("{m} {n}\n"));
            for j in 0..n {
                for i in 0..m {
                    out.push_str(&format!("{:e}\n", data[i * n + j]));
                }
            }
        }
        Storage::Sparse(csr) => {
            out.push_str("%%MatrixMarket matrix coordinate real general\n");
            out.push_str(&format!("{m} {n} {}\n", csr.values().len()));
            for i in 0..m {
                for (j, v) in inst.row(i).iter() {
                    out.push_str(&format!("{} {} {v:e}\n", i + 1, j + 1));
                }
            }
        }
    }
    out
}

pub fn write_matrix_market(inst: &PolytopeInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_matrix_market(inst))?;
    Ok(())
}
