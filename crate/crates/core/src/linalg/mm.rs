//! MatrixMarket coordinate files and plain one-value-per-line vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Only the lower triangle is stored; it is mirrored on read.
    Symmetric,
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse a real coordinate MatrixMarket stream.
pub fn read_matrix<R: Read>(reader: R, name: &str) -> Result<CsrMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(name, 1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(name, 1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(name, 1, "only coordinate format is supported"));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(name, 1, format!("unsupported field {}", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(name, 1, format!("unsupported symmetry {other}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(name, lineno, "expected `rows cols nnz`"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| parse_err(name, lineno, e.to_string()));
                let dims = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
                triplets.reserve(dims.2 * if symmetry == Symmetry::Symmetric { 2 } else { 1 });
                size = Some(dims);
            }
            Some((rows, cols, _)) => {
                if parts.len() != 3 {
                    return Err(parse_err(name, lineno, "expected `row col value`"));
                }
                let i: usize = parts[0].parse().map_err(|_| parse_err(name, lineno, "bad row index"))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| parse_err(name, lineno, "bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| parse_err(name, lineno, "bad value"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(name, lineno, format!("index ({i}, {j}) out of range")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(name, 0, "missing size line"))?;
    let stored = match symmetry {
        Symmetry::General => triplets.len(),
        Symmetry::Symmetric => triplets.iter().filter(|t| t.0 >= t.1).count(),
    };
    if stored != nnz {
        return Err(parse_err(
            name,
            0,
            format!("header announces {nnz} entries, found {stored}"),
        ));
    }
    CsrMatrix::from_triplets(rows, cols, &triplets)
}

pub fn write_matrix<W: Write>(a: &CsrMatrix, symmetry: Symmetry, mut w: W) -> Result<()> {
    let kind = match symmetry {
        Symmetry::General => "general",
        Symmetry::Symmetric => "symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let keep = |i: usize, j: usize| symmetry == Symmetry::General || i >= j;
    let count = (0..a.n_rows())
        .map(|i| a.row(i).0.iter().filter(|&&j| keep(i, j)).count())
        .sum::<usize>();
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), count)?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if keep(i, j) {
                writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let path = path.as_ref();
    read_matrix(File::open(path)?, &path.display().to_string())
}

pub fn write_matrix_file(a: &CsrMatrix, symmetry: Symmetry, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(a, symmetry, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_vector<R: Read>(reader: R, name: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        out.push(t.parse::<f64>().map_err(|e| parse_err(name, idx + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_vector<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    read_vector(File::open(path)?, &path.display().to_string())
}

pub fn write_vector_file(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(v, &mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_storage_is_expanded() {
        let src = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 4\n2 1 -1\n2 2 4\n";
        let a = read_matrix(src.as_bytes(), "mem").unwrap();
        assert_eq!(a.to_dense(), vec![4.0, -1.0, -1.0, 4.0]);
    }

    #[test]
    fn round_trip_both_variants() {
        let a = CsrMatrix::from_dense(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -0.5, 0.0, -0.5, 1.0]).unwrap();
        for sym in [Symmetry::General, Symmetry::Symmetric] {
            let mut buf = Vec::new();
            write_matrix(&a, sym, &mut buf).unwrap();
            assert_eq!(read_matrix(buf.as_slice(), "mem").unwrap(), a);
        }
    }

    #[test]
    fn reports_bad_input() {
        let src = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        let err = read_matrix(src.as_bytes(), "bad.mtx").unwrap_err();
        assert!(err.to_string().starts_with("bad.mtx:3:"), "{err}");
        let src = "%%MatrixMarket matrix array real general\n";
        assert!(read_matrix(src.as_bytes(), "x").is_err());
        let src = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix(src.as_bytes(), "x").is_err());
    }

    #[test]
    fn vectors() {
        let v = vec![1.5, -2.0, 3.25e-9];
        let mut buf = Vec::new();
        write_vector(&v, &mut buf).unwrap();
        assert_eq!(read_vector(buf.as_slice(), "v").unwrap(), v);
        assert!(read_vector("1.0\nabc\n".as_bytes(), "v").is_err());
    }
}
