//! Matrix Market exchange format, complex general matrices.
//!
//! Writes `array complex general` (dense, column-major); reads array or
//! coordinate files with real, integer or complex fields and general,
//! symmetric, skew-symmetric or hermitian symmetry. Finite values
//! round-trip exactly: the writer emits the shortest decimal that parses
//! back to the same double.

use std::fmt::Write as _;
use std::path::Path;

use riesz_core::linalg::{cplx, CMat, C64};
use riesz_core::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmFormat {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmField {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Serializes a dense complex matrix, with optional `%`-comment lines after
/// the banner (used to echo the generating seed and spec).
pub fn matrix_to_string(m: &CMat, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array complex general\n");
    for c in comments {
        // Keep comments one-line so the size header stays parseable.
        let flat = c.replace('\n', " ");
        let _ = writeln!(out, "% {flat}");
    }
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{} {}", z.re, z.im);
        }
    }
    out
}

pub fn save_matrix(path: &Path, m: &CMat, comments: &[String]) -> Result<()> {
    std::fs::write(path, matrix_to_string(m, comments)).map_err(|e| Error::InvalidSpec {
        reason: format!("cannot write {}: {e}", path.display()),
    })
}

/// Parses a Matrix Market file. Returns the matrix and any comment lines.
pub fn matrix_from_string(text: &str) -> Result<(CMat, Vec<String>)> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected %%MatrixMarket banner"))?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            1,
            "banner must read '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let format = match tokens[2].as_str() {
        "array" => MmFormat::Array,
        "coordinate" => MmFormat::Coordinate,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" => MmField::Real,
        "integer" => MmField::Integer,
        "complex" => MmField::Complex,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        "hermitian" => MmSymmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut comments = Vec::new();
    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(stripped) = trimmed.strip_prefix('%') {
            comments.push(stripped.trim_start().to_string());
            continue;
        }
        size_line = Some((idx + 1, trimmed));
        break;
    }
    let (size_no, size) = size_line.ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();

    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(size_no, format!("invalid {what}: '{s}'")))
    };

    match format {
        MmFormat::Array => {
            if dims.len() != 2 {
                return Err(parse_err(size_no, "array size line must be 'rows cols'"));
            }
            let rows = parse_usize(dims[0], "row count")?;
            let cols = parse_usize(dims[1], "column count")?;
            if symmetry != MmSymmetry::General && rows != cols {
                return Err(Error::DimensionMismatch {
                    context: format!("{rows}x{cols} array declared {symmetry:?}"),
                });
            }
            let mut m = CMat::zeros(rows, cols);
            // General arrays store the full matrix; the symmetric variants
            // store the lower triangle (including the diagonal) per column.
            let mut expected = Vec::new();
            for j in 0..cols {
                let start = if symmetry == MmSymmetry::General { 0 } else { j };
                for i in start..rows {
                    expected.push((i, j));
                }
            }
            let mut filled = 0usize;
            for (idx, line) in lines {
                let no = idx + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                if filled >= expected.len() {
                    return Err(parse_err(no, "more entries than the size line declares"));
                }
                let (i, j) = expected[filled];
                let z = parse_value(trimmed, field, no)?;
                m[(i, j)] = z;
                apply_symmetry(&mut m, i, j, z, symmetry);
                filled += 1;
            }
            if filled != expected.len() {
                return Err(parse_err(
                    size_no,
                    format!("expected {} entries, found {filled}", expected.len()),
                ));
            }
            Ok((m, comments))
        }
        MmFormat::Coordinate => {
            if dims.len() != 3 {
                return Err(parse_err(
                    size_no,
                    "coordinate size line must be 'rows cols nnz'",
                ));
            }
            let rows = parse_usize(dims[0], "row count")?;
            let cols = parse_usize(dims[1], "column count")?;
            let nnz = parse_usize(dims[2], "entry count")?;
            let mut m = CMat::zeros(rows, cols);
            let mut seen = 0usize;
            for (idx, line) in lines {
                let no = idx + 1;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                if seen >= nnz {
                    return Err(parse_err(no, "more entries than the size line declares"));
                }
                let mut parts = trimmed.split_whitespace();
                let i = parse_usize(
                    parts.next().ok_or_else(|| parse_err(no, "missing row index"))?,
                    "row index",
                )
                .map_err(|_| parse_err(no, "invalid row index"))?;
                let j = parse_usize(
                    parts
                        .next()
                        .ok_or_else(|| parse_err(no, "missing column index"))?,
                    "column index",
                )
                .map_err(|_| parse_err(no, "invalid column index"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(
                        no,
                        format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
                    ));
                }
                let rest: Vec<&str> = parts.collect();
                let z = parse_value(&rest.join(" "), field, no)?;
                m[(i - 1, j - 1)] = z;
                apply_symmetry(&mut m, i - 1, j - 1, z, symmetry);
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    size_no,
                    format!("size line declares {nnz} entries, found {seen}"),
                ));
            }
            Ok((m, comments))
        }
    }
}

fn parse_value(s: &str, field: MmField, line_no: usize) -> Result<C64> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let want = if field == MmField::Complex { 2 } else { 1 };
    if parts.len() != want {
        return Err(parse_err(
            line_no,
            format!("expected {want} value(s), found {}: '{s}'", parts.len()),
        ));
    }
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| parse_err(line_no, format!("invalid number '{t}'")))
    };
    Ok(match field {
        MmField::Complex => cplx(num(parts[0])?, num(parts[1])?),
        MmField::Real | MmField::Integer => cplx(num(parts[0])?, 0.0),
    })
}

fn apply_symmetry(m: &mut CMat, i: usize, j: usize, z: C64, symmetry: MmSymmetry) {
    if i == j {
        return;
    }
    match symmetry {
        MmSymmetry::General => {}
        MmSymmetry::Symmetric => m[(j, i)] = z,
        MmSymmetry::SkewSymmetric => m[(j, i)] = -z,
        MmSymmetry::Hermitian => m[(j, i)] = z.conj(),
    }
}

pub fn load_matrix(path: &Path) -> Result<(CMat, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidSpec {
        reason: format!("cannot read {}: {e}", path.display()),
    })?;
    matrix_from_string(&text)
}

/// Loads a matrix that must be square of dimension `expect` (if given).
pub fn load_square_matrix(path: &Path, expect: Option<usize>) -> Result<CMat> {
    let (m, _) = load_matrix(path)?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: format!("{}: {}x{} is not square", path.display(), m.nrows(), m.ncols()),
        });
    }
    if let Some(n) = expect {
        if m.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: format!("{}: expected {n}x{n}, found {}x{}", path.display(), m.nrows(), m.ncols()),
            });
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use riesz_core::linalg::random_ginibre;

    #[test]
    fn complex_array_round_trips_bitwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = random_ginibre(8, &mut rng);
        let text = matrix_to_string(&m, &["seed: 3".into()]);
        let (back, comments) = matrix_from_string(&text).unwrap();
        assert_eq!(m, back);
        assert_eq!(comments, vec!["seed: 3".to_string()]);
    }

    #[test]
    fn special_values_round_trip() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cplx(1e-308, -0.1);
        m[(0, 1)] = cplx(std::f64::consts::PI, 1.0 / 3.0);
        m[(1, 0)] = cplx(-0.0, 1.7976931348623157e308);
        m[(1, 1)] = cplx(5e-324, -2.2250738585072014e-308);
        let (back, _) = matrix_from_string(&matrix_to_string(&m, &[])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[(i, j)].re.to_bits(), back[(i, j)].re.to_bits());
                assert_eq!(m[(i, j)].im.to_bits(), back[(i, j)].im.to_bits());
            }
        }
    }

    #[test]
    fn real_array_loads_with_zero_imaginary_part() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2.5\n-3\n4e2\n";
        let (m, _) = matrix_from_string(text).unwrap();
        assert_eq!(m[(0, 0)], cplx(1.0, 0.0));
        assert_eq!(m[(1, 0)], cplx(2.5, 0.0));
        assert_eq!(m[(0, 1)], cplx(-3.0, 0.0));
        assert_eq!(m[(1, 1)], cplx(400.0, 0.0));
    }

    #[test]
    fn coordinate_forms_full_matrix() {
        let text = "%%MatrixMarket matrix coordinate complex general\n\
                    % sparse sample\n\
                    3 3 2\n\
                    1 2 1.5 -0.5\n\
                    3 3 2 0\n";
        let (m, comments) = matrix_from_string(text).unwrap();
        assert_eq!(comments, vec!["sparse sample".to_string()]);
        assert_eq!(m[(0, 1)], cplx(1.5, -0.5));
        assert_eq!(m[(2, 2)], cplx(2.0, 0.0));
        assert_eq!(m[(0, 0)], cplx(0.0, 0.0));
    }

    #[test]
    fn hermitian_coordinate_mirrors_conjugate() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n\
                    2 2 2\n\
                    1 1 1 0\n\
                    2 1 0.5 0.25\n";
        let (m, _) = matrix_from_string(text).unwrap();
        assert_eq!(m[(1, 0)], cplx(0.5, 0.25));
        assert_eq!(m[(0, 1)], cplx(0.5, -0.25));
    }

    #[test]
    fn symmetric_array_reads_lower_triangle() {
        let text = "%%MatrixMarket matrix array real symmetric\n\
                    2 2\n\
                    1\n\
                    2\n\
                    3\n";
        let (m, _) = matrix_from_string(text).unwrap();
        assert_eq!(m[(0, 0)], cplx(1.0, 0.0));
        assert_eq!(m[(1, 0)], cplx(2.0, 0.0));
        assert_eq!(m[(0, 1)], cplx(2.0, 0.0));
        assert_eq!(m[(1, 1)], cplx(3.0, 0.0));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad_banner = "%%MatrixMarket tensor array complex general\n1 1\n0 0\n";
        match matrix_from_string(bad_banner) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected ParseError, got {other:?}"),
        }

        let bad_value = "%%MatrixMarket matrix array complex general\n1 1\nnope 0\n";
        match matrix_from_string(bad_value) {
            Err(Error::ParseError { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("nope"));
            }
            other => panic!("expected ParseError, got {other:?}"),
        }

        let missing = "%%MatrixMarket matrix array complex general\n2 2\n0 0\n";
        match matrix_from_string(missing) {
            Err(Error::ParseError { message, .. }) => {
                assert!(message.contains("expected 4 entries"))
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn rectangular_symmetric_is_a_dimension_error() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 3\n1\n2\n3\n4\n5\n";
        assert!(matches!(
            matrix_from_string(text),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
