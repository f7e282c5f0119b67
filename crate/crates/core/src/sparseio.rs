//! Memory accounting for the triplet and CSC forms, and Matrix Market
//! exchange of the assembled lower triangle.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::assemble::LowerCscMatrix;
use crate::error::{Error, Result};

/// Byte model behind the memory figures.
///
/// Triplet entries carry two four-byte indices and an eight-byte value; CSC
/// entries an eight-byte row index and an eight-byte value, plus one
/// eight-byte column pointer per column and one extra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryModel;

impl MemoryModel {
    pub const TRIPLET_BYTES_PER_ENTRY: u64 = 16;
    pub const CSC_BYTES_PER_ENTRY: u64 = 16;
    pub const CSC_BYTES_PER_COLPTR: u64 = 8;
    pub const MEGABYTE: f64 = 1e6;
}

pub fn triplet_bytes(nnz_triplet: u64) -> u64 {
    nnz_triplet * MemoryModel::TRIPLET_BYTES_PER_ENTRY
}

pub fn csc_bytes(nnz_csc: u64, dim: u64) -> u64 {
    nnz_csc * MemoryModel::CSC_BYTES_PER_ENTRY + (dim + 1) * MemoryModel::CSC_BYTES_PER_COLPTR
}

/// Triplet storage in MB (10⁶ bytes).
pub fn triplet_memory(nnz_triplet: u64) -> f64 {
    triplet_bytes(nnz_triplet) as f64 / MemoryModel::MEGABYTE
}

/// CSC storage in MB (10⁶ bytes).
pub fn csc_memory(nnz_csc: u64, dim: u64) -> f64 {
    csc_bytes(nnz_csc, dim) as f64 / MemoryModel::MEGABYTE
}

/// `1 − csc / triplet` as a fraction.
pub fn memory_saving(triplet_mb: f64, csc_mb: f64) -> Result<f64> {
    if triplet_mb <= 0.0 {
        return Err(Error::Validation("memory saving is undefined for an empty triplet matrix".into()));
    }
    Ok(1.0 - csc_mb / triplet_mb)
}

/// Megabytes as printed in memory tables: two decimals below 10 MB, one
/// decimal otherwise.
pub fn format_mb(mb: f64) -> String {
    if mb < 10.0 {
        format!("{mb:.2}")
    } else {
        format!("{mb:.1}")
    }
}

/// A fraction as a percentage with one decimal, e.g. `0.5677 → "56.8"`.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.1}", 100.0 * fraction)
}

pub const MATRIX_MARKET_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Writes the stored lower triangle, 1-based, column-major, values with 17
/// significant digits.
pub fn write_matrix_market<W: Write>(m: &LowerCscMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{MATRIX_MARKET_HEADER}")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), m.nnz())?;
    for (r, c, v) in m.entries() {
        writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

pub fn export_matrix_market(m: &LowerCscMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(m, BufWriter::new(File::create(path)?))
}

/// Reads a symmetric coordinate file holding only lower-triangle entries.
/// Entries may appear in any order but may not repeat.
pub fn read_matrix_market<R: Read>(input: R) -> Result<LowerCscMatrix> {
    let mut lines = BufReader::new(input).lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::parse(1, "empty Matrix Market file")),
    };
    let banner: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner.len() != 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix" || banner[2] != "coordinate" {
        return Err(Error::parse(1, "expected `%%MatrixMarket matrix coordinate ...` banner"));
    }
    if banner[3] != "real" {
        return Err(Error::parse(1, format!("unsupported field `{}`", banner[3])));
    }
    if banner[4] != "symmetric" {
        return Err(Error::parse(1, format!("expected a symmetric matrix, found `{}`", banner[4])));
    }

    let mut size = None;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(ln, format!("expected 3 fields, found {}", fields.len())));
        }
        match size {
            None => {
                let nrows: usize = parse(ln, fields[0])?;
                let ncols: usize = parse(ln, fields[1])?;
                let nnz: usize = parse(ln, fields[2])?;
                if nrows != ncols {
                    return Err(Error::parse(ln, format!("symmetric matrix must be square, got {nrows}×{ncols}")));
                }
                entries.reserve(nnz);
                size = Some((nrows, nnz));
            }
            Some((dim, _)) => {
                let r: usize = parse(ln, fields[0])?;
                let c: usize = parse(ln, fields[1])?;
                let v: f64 = parse(ln, fields[2])?;
                if r == 0 || c == 0 || r > dim || c > dim {
                    return Err(Error::Validation(format!("line {ln}: entry ({r}, {c}) outside a {dim}×{dim} matrix")));
                }
                if r < c {
                    return Err(Error::Validation(format!("line {ln}: entry ({r}, {c}) is in the upper triangle")));
                }
                entries.push((r - 1, c - 1, v));
            }
        }
    }

    let (dim, nnz) = size.ok_or_else(|| Error::parse(1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(Error::Validation(format!("size line announces {nnz} entries, found {}", entries.len())));
    }

    entries.sort_by_key(|&(r, c, _)| (c, r));
    if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(Error::Validation(format!("duplicate entry ({}, {})", w[0].0 + 1, w[0].1 + 1)));
    }
    let mut col_ptr = vec![0usize; dim + 1];
    for &(_, c, _) in &entries {
        col_ptr[c + 1] += 1;
    }
    for c in 0..dim {
        col_ptr[c + 1] += col_ptr[c];
    }
    let row_idx = entries.iter().map(|e| e.0).collect();
    let vals = entries.iter().map(|e| e.2).collect();
    LowerCscMatrix::from_parts(dim, col_ptr, row_idx, vals)
}

pub fn import_matrix_market(path: impl AsRef<Path>) -> Result<LowerCscMatrix> {
    read_matrix_market(File::open(path)?)
}

fn parse<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number `{field}`")))
}
