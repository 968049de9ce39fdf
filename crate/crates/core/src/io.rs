//! Matrix Market coordinate I/O and small serialization helpers.

use crate::error::{AmgError, Result};
use crate::sparse::SparseMatrix;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Writes `real general` coordinate format. Values are printed with 17
/// significant digits so stored entries round-trip exactly.
pub fn write_matrix_market(a: &SparseMatrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:.16e}", i + 1, c + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `real general` coordinate format; duplicate entries are summed.
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| AmgError::Parse("empty matrix market file".into()))??;
    let h = header.to_lowercase();
    if !h.starts_with("%%matrixmarket") || !h.contains("coordinate") || !h.contains("real") {
        return Err(AmgError::Parse(format!(
            "unsupported matrix market header: {header}"
        )));
    }
    if !h.contains("general") {
        return Err(AmgError::Parse(
            "only 'general' symmetry is supported".into(),
        ));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        let mut it = s.split_whitespace();
        if dims.is_none() {
            let r = parse_usize(it.next(), "rows")?;
            let c = parse_usize(it.next(), "cols")?;
            let nnz = parse_usize(it.next(), "nnz")?;
            dims = Some((r, c, nnz));
            continue;
        }
        let i = parse_usize(it.next(), "row index")?;
        let j = parse_usize(it.next(), "col index")?;
        let v: f64 = it
            .next()
            .ok_or_else(|| AmgError::Parse("missing value".into()))?
            .parse()
            .map_err(|e| AmgError::Parse(format!("bad value: {e}")))?;
        if i == 0 || j == 0 {
            return Err(AmgError::Parse("matrix market indices are 1-based".into()));
        }
        triplets.push((i - 1, j - 1, v));
    }
    let (r, c, nnz) = dims.ok_or_else(|| AmgError::Parse("missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(AmgError::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    SparseMatrix::from_triplets(r, c, &triplets)
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize> {
    tok.ok_or_else(|| AmgError::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|e| AmgError::Parse(format!("bad {what}: {e}")))
}

/// FNV-1a 64-bit hash, used to fingerprint configurations in reports.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
