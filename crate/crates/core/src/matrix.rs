//! The expressed influence matrix and its CSV representations.
//!
//! Two on-disk layouts are supported, both with 0-based indices:
//!
//! * dense: one matrix row per line, comma separated decimals;
//! * sparse triplets: a header line `i,j,w` followed by one entry per line.
//!
//! The reader detects the layout from the first line.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::ops::Index;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A square, non-negative, finite weight matrix `W̄` mapping innate
/// predictions to expressed predictions (`z* = W̄ ŷ`).
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    inner: DMatrix<f64>,
}

impl InfluenceMatrix {
    /// Validates and wraps a dense matrix.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimensionMismatch {
                expected: inner.nrows(),
                found: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(Error::InvalidMatrix("matrix must have at least one row".into()));
        }
        let n = inner.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = inner[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v} must be finite and non-negative"
                    )));
                }
            }
        }
        Ok(Self { inner })
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Row `i` copied into a vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n()).map(|j| self.inner[(i, j)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i)).collect()
    }

    /// `W̄ x` for a real vector `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect())
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n()).map(|j| self.inner[(i, j)]).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.n()).map(|i| self.inner[(i, j)]).sum()
    }

    /// Fraction of exactly-zero entries.
    pub fn zero_fraction(&self) -> f64 {
        let zeros = self.inner.iter().filter(|&&v| v == 0.0).count();
        zeros as f64 / (self.n() * self.n()) as f64
    }

    /// Maximum column ℓ1 distance `max_j Σ_i |A_ij − B_ij|`.
    pub fn max_column_l1_distance(&self, other: &InfluenceMatrix) -> Result<f64> {
        let n = self.n();
        if other.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: other.n(),
            });
        }
        Ok((0..n)
            .map(|j| (0..n).map(|i| (self.get(i, j) - other.get(i, j)).abs()).sum::<f64>())
            .fold(0.0, f64::max))
    }

    /// Dense CSV text (`{}` formatting round-trips `f64` exactly).
    pub fn to_dense_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{}", self.inner[(i, j)]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Sparse triplet CSV text with header `i,j,w`, nonzero entries only.
    pub fn to_triplet_csv(&self) -> String {
        let n = self.n();
        let mut out = String::from("i,j,w\n");
        // an explicit size record keeps trailing all-zero rows recoverable
        writeln!(out, "{},{},0", n - 1, n - 1).unwrap();
        for i in 0..n {
            for j in 0..n {
                let v = self.inner[(i, j)];
                if v != 0.0 && !(i == n - 1 && j == n - 1) {
                    writeln!(out, "{i},{j},{v}").unwrap();
                }
            }
        }
        if self.inner[(n - 1, n - 1)] != 0.0 {
            writeln!(out, "{},{},{}", n - 1, n - 1, self.inner[(n - 1, n - 1)]).unwrap();
        }
        out
    }

    /// Parses dense or triplet CSV text.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        let header: Vec<&str> = first.split(',').map(str::trim).collect();
        if header == ["i", "j", "w"] {
            parse_triplets(text)
        } else {
            parse_dense(text)
        }
    }

    pub fn read_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::from_csv_str(&text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_dense_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_dense_csv().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_dense_csv())?;
        Ok(())
    }
}

impl Index<(usize, usize)> for InfluenceMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{field}`: {e}")))
}

fn parse_dense(text: &str) -> Result<InfluenceMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(parse_f64).collect::<Result<Vec<_>>>()?);
    }
    InfluenceMatrix::from_rows(&rows)
}

fn parse_triplets(text: &str) -> Result<InfluenceMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut entries = Vec::new();
    let mut n = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("triplet record has {} fields", rec.len())));
        }
        let i: usize = rec[0]
            .parse()
            .map_err(|e| Error::Parse(format!("row index `{}`: {e}", &rec[0])))?;
        let j: usize = rec[1]
            .parse()
            .map_err(|e| Error::Parse(format!("column index `{}`: {e}", &rec[1])))?;
        let w = parse_f64(&rec[2])?;
        n = n.max(i + 1).max(j + 1);
        entries.push((i, j, w));
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, j, w) in entries {
        m[(i, j)] += w;
    }
    InfluenceMatrix::new(m)
}
