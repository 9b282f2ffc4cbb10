//! Row-sparse Hermitian observables and their coordinate-triplet CSV form.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{qubits_for_dim, MAX_DENSE_QUBITS};
use crate::rng::RngSeed;
use crate::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntryMode {
    #[default]
    Real,
    ComplexOffdiag,
}

impl fmt::Display for EntryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryMode::Real => "real",
            EntryMode::ComplexOffdiag => "complex_offdiag",
        })
    }
}

impl FromStr for EntryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(EntryMode::Real),
            "complex_offdiag" | "complex" => Ok(EntryMode::ComplexOffdiag),
            other => Err(Error::Parse(format!("unknown entry mode '{other}'"))),
        }
    }
}

/// Hermitian `2^n x 2^n` matrix stored as sorted per-row `(column, value)` lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    n: usize,
    k: usize,
    mode: EntryMode,
    seed: Option<RngSeed>,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseHermitian {
    /// Builds from the upper triangle (including the diagonal); the lower
    /// triangle is mirrored so the result is exactly Hermitian.
    pub(crate) fn from_upper(
        n: usize,
        k: usize,
        mode: EntryMode,
        seed: Option<RngSeed>,
        upper: impl IntoIterator<Item = ((usize, usize), Complex64)>,
    ) -> Self {
        let dim = 1usize << n;
        let mut rows = vec![Vec::new(); dim];
        for ((r, c), v) in upper {
            if r == c {
                rows[r].push((c, Complex64::new(v.re, 0.0)));
            } else {
                rows[r].push((c, v));
                rows[c].push((r, v.conj()));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|(c, _)| *c);
        }
        Self { n, k, mode, seed, rows }
    }

    pub fn identity(n: usize) -> Self {
        let dim = 1usize << n;
        Self::from_upper(n, 1, EntryMode::Real, None, (0..dim).map(|i| ((i, i), Complex64::new(1.0, 0.0))))
    }

    /// Accepts a dense Hermitian matrix; entries with `|v| <= 0` are dropped.
    pub fn from_dense(a: &DenseMatrix, tolerance: f64) -> Result<Self> {
        let n = qubits_for_dim(a.nrows())?;
        let deviation = crate::pauli::hermiticity_deviation(a);
        if deviation > tolerance {
            return Err(Error::NotHermitian { deviation });
        }
        let mut upper = Vec::new();
        let mut max_row = 0;
        for r in 0..a.nrows() {
            let mut count = 0;
            for c in 0..a.ncols() {
                if a[(r, c)].norm() > 0.0 {
                    count += 1;
                    if c >= r {
                        upper.push(((r, c), a[(r, c)]));
                    }
                }
            }
            max_row = max_row.max(count);
        }
        let mode = if upper.iter().any(|(_, v)| v.im != 0.0) { EntryMode::ComplexOffdiag } else { EntryMode::Real };
        Ok(Self::from_upper(n, max_row.max(1), mode, None, upper))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Nominal sparsity the matrix was generated with.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> EntryMode {
        self.mode
    }

    pub fn seed(&self) -> Option<RngSeed> {
        self.seed
    }

    pub fn rows(&self) -> &[Vec<(usize, Complex64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mean_row_count(&self) -> f64 {
        self.nnz() as f64 / self.dim() as f64
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.rows[r]
            .binary_search_by_key(&c, |(col, _)| *col)
            .map(|i| self.rows[r][i].1)
            .unwrap_or_default()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|row| row.iter().map(|(c, v)| v * x[*c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::DimensionTooLarge { n: self.n, max: MAX_DENSE_QUBITS });
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                m[(r, *c)] = *v;
            }
        }
        Ok(m)
    }

    /// Max absolute row sum. Equals the max column sum for Hermitian matrices.
    pub fn max_abs_row_sum(&self) -> f64 {
        self.rows.iter().map(|row| row.iter().map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Max absolute row sum of `O - tr(O)/2^n * I`.
    pub fn centered_max_abs_row_sum(&self) -> f64 {
        let shift = self.trace() / self.dim() as f64;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut diag_seen = false;
                let mut s = 0.0;
                for (c, v) in row {
                    if *c == i {
                        diag_seen = true;
                        s += (v.re - shift).abs() + v.im.abs();
                    } else {
                        s += v.norm();
                    }
                }
                if !diag_seen {
                    s += shift.abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Coordinate-triplet CSV with a `# dim=.. k=.. mode=.. seed=..` header.
    pub fn to_csv(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        let mut out = format!("# dim={} k={} mode={} seed={}\nrow,col,re,im\n", self.dim(), self.k, self.mode, seed);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                let _ = writeln!(out, "{r},{c},{},{}", v.re, v.im);
            }
        }
        out
    }

    pub fn from_csv(text: &str, tolerance: f64) -> Result<Self> {
        let triplets = TripletMatrix::parse_csv(text)?;
        let mut m = Self::from_dense(&triplets.to_dense()?, tolerance)?;
        if let Some(k) = triplets.k {
            m.k = k;
        }
        if let Some(mode) = triplets.mode {
            m.mode = mode;
        }
        m.seed = triplets.seed;
        Ok(m)
    }
}

/// Parsed coordinate-triplet file; not necessarily Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletMatrix {
    pub dim: usize,
    pub k: Option<usize>,
    pub mode: Option<EntryMode>,
    pub seed: Option<RngSeed>,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl TripletMatrix {
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut k = None;
        let mut mode = None;
        let mut seed = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split_whitespace() {
                    let Some((key, value)) = field.split_once('=') else { continue };
                    let bad = || Error::Parse(format!("line {}: bad header field '{field}'", lineno + 1));
                    match key {
                        "dim" => {
                            let v = value.strip_prefix("2^").map_or_else(
                                || value.parse::<usize>().ok(),
                                |exp| exp.parse::<u32>().ok().and_then(|e| 1usize.checked_shl(e)),
                            );
                            dim = Some(v.ok_or_else(bad)?);
                        }
                        "k" => k = Some(value.parse().map_err(|_| bad())?),
                        "mode" => mode = Some(value.parse()?),
                        "seed" if value != "none" => seed = Some(value.parse()?),
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("row") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("line {}: expected row,col,re,im", lineno + 1));
            if cols.len() != 4 {
                return Err(bad());
            }
            let r: usize = cols[0].parse().map_err(|_| bad())?;
            let c: usize = cols[1].parse().map_err(|_| bad())?;
            let re: f64 = cols[2].parse().map_err(|_| bad())?;
            let im: f64 = cols[3].parse().map_err(|_| bad())?;
            if !re.is_finite() || !im.is_finite() {
                return Err(bad());
            }
            entries.push((r, c, Complex64::new(re, im)));
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing '# dim=' header".into()))?;
        qubits_for_dim(dim)?;
        if let Some((r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::Parse(format!("entry ({r},{c}) outside dimension {dim}")));
        }
        Ok(Self { dim, k, mode, seed, entries })
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = qubits_for_dim(self.dim)?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::DimensionTooLarge { n, max: MAX_DENSE_QUBITS });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in &self.entries {
            m[(*r, *c)] += *v;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mirrored_upper_is_hermitian() {
        let m = SparseHermitian::from_upper(2, 2, EntryMode::ComplexOffdiag, None, [((0, 1), c(1.0, 2.0)), ((2, 2), c(3.0, 0.0))]);
        assert_eq!(m.get(1, 0), c(1.0, -2.0));
        assert_eq!(m.trace(), 3.0);
        let d = m.to_dense().unwrap();
        assert_eq!(d.adjoint(), d);
    }

    #[test]
    fn row_sums() {
        let m = SparseHermitian::from_upper(1, 1, EntryMode::Real, None, [((0, 0), c(3.0, 0.0)), ((1, 1), c(-1.0, 0.0))]);
        assert_eq!(m.max_abs_row_sum(), 3.0);
        // shift = 1: |3-1| = 2, |-1-1| = 2
        assert_eq!(m.centered_max_abs_row_sum(), 2.0);
        assert_eq!(SparseHermitian::identity(3).max_abs_row_sum(), 1.0);
        assert_eq!(SparseHermitian::identity(3).centered_max_abs_row_sum(), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let m = SparseHermitian::from_upper(
            2,
            2,
            EntryMode::ComplexOffdiag,
            Some(RngSeed::new(4, 1)),
            [((0, 3), c(0.1, -0.7)), ((1, 1), c(-2.5, 0.0))],
        );
        let csv = m.to_csv();
        assert!(csv.starts_with("# dim=4 k=2 mode=complex_offdiag seed=4:1\nrow,col,re,im\n"));
        assert_eq!(SparseHermitian::from_csv(&csv, 1e-12).unwrap(), m);
    }

    #[test]
    fn csv_errors() {
        assert!(TripletMatrix::parse_csv("0,0,1,0\n").is_err());
        assert!(TripletMatrix::parse_csv("# dim=3\n").is_err());
        assert!(TripletMatrix::parse_csv("# dim=2\n0,0,1\n").is_err());
        assert!(TripletMatrix::parse_csv("# dim=2\n5,0,1,0\n").is_err());
        let t = TripletMatrix::parse_csv("# dim=2^1\n0,1,1,0\n").unwrap();
        assert_eq!(t.dim, 2);
        assert!(matches!(SparseHermitian::from_csv("# dim=2\n0,1,1,0\n", 1e-10), Err(Error::NotHermitian { .. })));
    }
}
