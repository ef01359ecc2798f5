//! Plain-text matrix files: one row per line, comma-separated decimals,
//! `#` comment lines and blank lines ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use procrustes::spectral::validate_psd;
use procrustes::{Covariance, SymMatrix};

use crate::error::{CliError, Context};

/// Relative tolerance on `|a_ij − a_ji|` before symmetrizing.
pub const SYMMETRY_TOL: f64 = 1e-9;

pub fn parse_matrix(text: &str, path: &Path) -> Result<DMatrix<f64>, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, field) in trimmed.split(',').enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| {
                CliError::parse(path, Some(ln + 1), Some(col + 1), format!("cannot parse {field:?} as a number"))
            })?;
            if !v.is_finite() {
                return Err(CliError::parse(path, Some(ln + 1), Some(col + 1), "non-finite entry"));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::parse(
                    path,
                    Some(ln + 1),
                    None,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, None, None, "no matrix rows"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    if r != c {
        return Err(CliError::parse(path, None, None, format!("matrix is {r}x{c}, not square")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Parses, checks symmetry and validates a covariance file.
pub fn read_covariance(path: &Path) -> Result<Covariance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let m = parse_matrix(&text, path)?;
    let scale = m.amax();
    let d = m.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(CliError::parse(
                    path,
                    Some(i + 1),
                    Some(j + 1),
                    format!("matrix is not symmetric: {} vs {}", m[(i, j)], m[(j, i)]),
                ));
            }
        }
    }
    let sym = SymMatrix::new(m).context(|| path.display().to_string())?;
    validate_psd(&sym).context(|| path.display().to_string())
}

/// `{:.16e}` per entry: 17 significant digits, which re-parse to the same double.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    write_atomic(path, &format_matrix(m))
}
