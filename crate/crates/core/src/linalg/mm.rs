//! MatrixMarket reader and writer.
//!
//! Supports `coordinate` matrices with `real`, `integer` or `pattern` fields
//! and `general` or `symmetric` symmetry, plus dense `array real general`
//! files (used for vertex coordinates).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmHeader {
    pub format: MmFormat,
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

/// Parsed file contents. Coordinate entries are zero-based and reported as
/// stored (no symmetric expansion).
#[derive(Debug, Clone)]
pub struct MmData {
    pub header: MmHeader,
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
    /// Column-major values for `array` files.
    pub dense: Vec<f64>,
}

fn perr(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        msg: msg.into(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<MmHeader> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match toks[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(perr(path, 1, format!("unsupported format '{other}'"))),
    };
    let field = match toks[3].as_str() {
        "real" | "double" => MmField::Real,
        "integer" => MmField::Integer,
        "pattern" => MmField::Pattern,
        other => return Err(perr(path, 1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => return Err(perr(path, 1, format!("unsupported symmetry '{other}'"))),
    };
    if format == MmFormat::Array && field == MmField::Pattern {
        return Err(perr(path, 1, "array format cannot be pattern"));
    }
    Ok(MmHeader {
        format,
        field,
        symmetry,
    })
}

/// Parses MatrixMarket text; `path` is only used in error messages.
pub fn parse_str(path: &Path, text: &str) -> Result<MmData> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| perr(path, 1, "empty file"))?;
    let header = parse_header(path, first)?;

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_no, size_line) = body.next().ok_or_else(|| perr(path, 2, "missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| perr(path, size_no + 1, format!("bad size line: {e}")))?;

    let mut data = MmData {
        header,
        nrows: 0,
        ncols: 0,
        entries: Vec::new(),
        dense: Vec::new(),
    };

    match header.format {
        MmFormat::Coordinate => {
            if size.len() != 3 {
                return Err(perr(path, size_no + 1, "coordinate size line needs 'rows cols nnz'"));
            }
            let (nr, nc, nnz) = (size[0], size[1], size[2]);
            data.nrows = nr;
            data.ncols = nc;
            data.entries.reserve(nnz);
            for (no, line) in body {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let want = if header.field == MmField::Pattern { 2 } else { 3 };
                if toks.len() < want {
                    return Err(perr(path, no + 1, format!("expected {want} fields")));
                }
                let idx = |t: &str, bound: usize| -> Result<usize> {
                    let i: usize = t
                        .parse()
                        .map_err(|e| perr(path, no + 1, format!("bad index '{t}': {e}")))?;
                    if i == 0 || i > bound {
                        return Err(perr(path, no + 1, format!("index {i} out of range 1..={bound}")));
                    }
                    Ok(i - 1)
                };
                let r = idx(toks[0], nr)?;
                let c = idx(toks[1], nc)?;
                let v = if header.field == MmField::Pattern {
                    1.0
                } else {
                    toks[2]
                        .parse::<f64>()
                        .map_err(|e| perr(path, no + 1, format!("bad value '{}': {e}", toks[2])))?
                };
                data.entries.push((r, c, v));
            }
            if data.entries.len() != nnz {
                return Err(perr(
                    path,
                    size_no + 1,
                    format!("header announces {nnz} entries, found {}", data.entries.len()),
                ));
            }
        }
        MmFormat::Array => {
            if size.len() != 2 {
                return Err(perr(path, size_no + 1, "array size line needs 'rows cols'"));
            }
            data.nrows = size[0];
            data.ncols = size[1];
            for (no, line) in body {
                for t in line.split_whitespace() {
                    let v = t
                        .parse::<f64>()
                        .map_err(|e| perr(path, no + 1, format!("bad value '{t}': {e}")))?;
                    data.dense.push(v);
                }
            }
            if data.dense.len() != data.nrows * data.ncols {
                return Err(perr(
                    path,
                    size_no + 1,
                    format!("expected {} values, found {}", data.nrows * data.ncols, data.dense.len()),
                ));
            }
        }
    }
    Ok(data)
}

pub fn read(path: impl AsRef<Path>) -> Result<MmData> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_str(path, &text)
}

/// Reads a coordinate file into a CSR matrix, expanding symmetric storage.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    let data = read(path)?;
    if data.header.format != MmFormat::Coordinate {
        return Err(perr(path, 1, "expected a coordinate matrix"));
    }
    let mut t = data.entries.clone();
    if data.header.symmetry == MmSymmetry::Symmetric {
        t.extend(data.entries.iter().filter(|e| e.0 != e.1).map(|&(r, c, v)| (c, r, v)));
    }
    Ok(CsrMatrix::from_triplets(data.nrows, data.ncols, &t))
}

/// Writes `a` as `coordinate real general` with full precision.
pub fn write_matrix(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    out.flush()?;
    Ok(())
}
