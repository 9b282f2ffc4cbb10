//! Pauli strings, LCP observables and the dense Hermitian <-> Pauli basis maps.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::DenseMatrix;

/// Qubit limit for dense materialization.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Qubit limit for full 4^n decomposition.
pub const MAX_DECOMPOSE_QUBITS: usize = 6;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 4] = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    pub const MEASURABLE: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn as_char(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }

    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            PauliAxis::I => [[l, o], [o, l]],
            PauliAxis::X => [[o, l], [l, o]],
            PauliAxis::Y => [[o, -i], [i, o]],
            PauliAxis::Z => [[l, o], [o, -l]],
        }
    }

    fn flips(self) -> bool {
        matches!(self, PauliAxis::X | PauliAxis::Y)
    }

    fn has_z_phase(self) -> bool {
        matches!(self, PauliAxis::Y | PauliAxis::Z)
    }
}

/// Tensor product of single-qubit Paulis; qubit 0 is the leftmost factor and
/// the most significant bit of a basis-state index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    axes: Vec<PauliAxis>,
}

impl PauliString {
    pub fn new(axes: Vec<PauliAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameters("Pauli string needs at least one qubit".into()));
        }
        Ok(Self { axes })
    }

    pub fn identity(n: usize) -> Self {
        Self { axes: vec![PauliAxis::I; n.max(1)] }
    }

    /// Index `0..4^n` to string, base-4 digits with qubit 0 most significant.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut axes = vec![PauliAxis::I; n];
        for q in (0..n).rev() {
            axes[q] = PauliAxis::ALL[index & 3];
            index >>= 2;
        }
        Self { axes }
    }

    pub fn num_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[PauliAxis] {
        &self.axes
    }

    pub fn axis(&self, qubit: usize) -> PauliAxis {
        self.axes[qubit]
    }

    pub fn weight(&self) -> usize {
        self.axes.iter().filter(|a| **a != PauliAxis::I).count()
    }

    /// Non-identity positions.
    pub fn support(&self) -> impl Iterator<Item = (usize, PauliAxis)> + '_ {
        self.axes.iter().copied().enumerate().filter(|(_, a)| *a != PauliAxis::I)
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.axes.len() - 1 - qubit)
    }

    /// Action on a computational basis state: `P|x> = phase * |x ^ flip>`.
    pub(crate) fn action(&self) -> PauliAction {
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ycount = 0u32;
        for (q, a) in self.axes.iter().enumerate() {
            if a.flips() {
                flip |= self.bit(q);
            }
            if a.has_z_phase() {
                zmask |= self.bit(q);
            }
            if *a == PauliAxis::Y {
                ycount += 1;
            }
        }
        let global = match ycount % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliAction { flip, zmask, global }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliAction {
    pub flip: usize,
    zmask: usize,
    global: Complex64,
}

impl PauliAction {
    pub fn phase(&self, x: usize) -> Complex64 {
        if (x & self.zmask).count_ones() % 2 == 1 {
            -self.global
        } else {
            self.global
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .trim()
            .chars()
            .map(|c| PauliAxis::from_char(c).ok_or_else(|| Error::Parse(format!("bad Pauli character '{c}' in '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    #[serde(rename = "coeff")]
    pub coefficient: f64,
    #[serde(rename = "pauli")]
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidParameters(format!("non-finite coefficient {coefficient}")));
        }
        Ok(Self { coefficient, string })
    }

    pub fn num_qubits(&self) -> usize {
        self.string.num_qubits()
    }
}

/// Weighted sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcpObservable {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl LcpObservable {
    pub fn new(terms: Vec<PauliTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameters("observable needs at least one term".into()))?;
        let n = first.num_qubits();
        for t in &terms {
            if t.num_qubits() != n {
                return Err(Error::MixedQubitCounts(n, t.num_qubits()));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidParameters("non-finite coefficient".into()));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("observable serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            n: usize,
            terms: Vec<PauliTerm>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let obs = Self::new(raw.terms)?;
        if obs.n != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: obs.n });
        }
        Ok(obs)
    }
}

impl<'de> Deserialize<'de> for LcpObservable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        Self::from_json(&v.to_string()).map_err(serde::de::Error::custom)
    }
}

/// Dense 2^n x 2^n matrix of a Pauli string (Kronecker product of factors).
pub fn materialize_pauli(string: &PauliString) -> Result<DenseMatrix> {
    let n = string.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_DENSE_QUBITS });
    }
    let mut acc = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for a in string.axes() {
        let m = a.matrix();
        let factor = DMatrix::from_fn(2, 2, |r, c| m[r][c]);
        acc = acc.kronecker(&factor);
    }
    Ok(acc)
}

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Largest entry of `|A - A^H|`.
pub fn hermiticity_deviation(a: &DenseMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..a.nrows() {
        for c in r..a.ncols() {
            worst = worst.max((a[(r, c)] - a[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `tr(A P) / 2^n` as a complex number; real for Hermitian `A`.
pub fn pauli_coefficient(a: &DenseMatrix, string: &PauliString) -> Result<Complex64> {
    let n = qubits_for_dim(a.nrows())?;
    if a.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    if string.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: string.num_qubits() });
    }
    let act = string.action();
    // P[x ^ f, x] = phase(x), so tr(A P) = sum_x A[x, x ^ f] phase(x).
    let trace: Complex64 = (0..a.nrows()).map(|x| a[(x, x ^ act.flip)] * act.phase(x)).sum();
    Ok(trace / a.nrows() as f64)
}

/// Expands a Hermitian matrix in the Pauli basis, keeping `|c| > tolerance`.
pub fn decompose_hermitian(a: &DenseMatrix, tolerance: f64) -> Result<Vec<PauliTerm>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let n = qubits_for_dim(a.nrows())?;
    if n > MAX_DECOMPOSE_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_DECOMPOSE_QUBITS });
    }
    let deviation = hermiticity_deviation(a);
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation });
    }
    let mut terms = Vec::new();
    for index in 0..(1usize << (2 * n)) {
        let string = PauliString::from_index(n, index);
        let c = pauli_coefficient(a, &string)?;
        if c.re.abs() > tolerance {
            terms.push(PauliTerm { coefficient: c.re, string });
        }
    }
    Ok(terms)
}

/// `sum_k c_k P_k` as a dense matrix on `n` qubits.
pub fn reconstruct(terms: &[PauliTerm], n: usize) -> Result<DenseMatrix> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut acc = DMatrix::zeros(dim, dim);
    for t in terms {
        if t.num_qubits() != n {
            return Err(Error::MixedQubitCounts(n, t.num_qubits()));
        }
        acc += materialize_pauli(&t.string)? * Complex64::new(t.coefficient, 0.0);
    }
    Ok(acc)
}

/// `tr(P Q)`; `2^n` when equal, otherwise zero.
pub fn trace_orthogonality_check(p: &PauliString, q: &PauliString) -> Result<f64> {
    if p.num_qubits() != q.num_qubits() {
        return Err(Error::MixedQubitCounts(p.num_qubits(), q.num_qubits()));
    }
    if p.num_qubits() > MAX_DECOMPOSE_QUBITS {
        return Err(Error::DimensionTooLarge { n: p.num_qubits(), max: MAX_DECOMPOSE_QUBITS });
    }
    Ok((materialize_pauli(p)? * materialize_pauli(q)?).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn materialize_z_and_identity() {
        let z = materialize_pauli(&ps("Z")).unwrap();
        assert_eq!(z, DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]));
        let ii = materialize_pauli(&ps("II")).unwrap();
        assert_eq!(ii, DMatrix::identity(4, 4));
    }

    #[test]
    fn materialize_xz_by_hand() {
        // X (x) Z = [[0, Z], [Z, 0]]
        let o = c(0., 0.);
        let p = c(1., 0.);
        let m = c(-1., 0.);
        let expected = DMatrix::from_row_slice(4, 4, &[
            o, o, p, o,
            o, o, o, m,
            p, o, o, o,
            o, m, o, o,
        ]);
        assert_eq!(materialize_pauli(&ps("XZ")).unwrap(), expected);
    }

    #[test]
    fn materialize_rejects_large() {
        let big = PauliString::identity(13);
        assert!(matches!(materialize_pauli(&big), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn decompose_basis_elements() {
        let z = materialize_pauli(&ps("Z")).unwrap();
        assert_eq!(decompose_hermitian(&z, 1e-10).unwrap(), vec![PauliTerm { coefficient: 1.0, string: ps("Z") }]);
        let id = DMatrix::identity(2, 2);
        assert_eq!(decompose_hermitian(&id, 1e-10).unwrap(), vec![PauliTerm { coefficient: 1.0, string: ps("I") }]);
    }

    #[test]
    fn decompose_two_term_example() {
        let a = materialize_pauli(&ps("XX")).unwrap() + materialize_pauli(&ps("ZI")).unwrap() * c(0.5, 0.);
        // Brute-force oracle: tr(A P) / 4 over all 16 strings via dense products.
        let mut oracle = Vec::new();
        for idx in 0..16 {
            let s = PauliString::from_index(2, idx);
            let coeff = (&a * materialize_pauli(&s).unwrap()).trace() / 4.0;
            if coeff.norm() > 1e-12 {
                oracle.push((s.to_string(), coeff.re));
            }
        }
        let terms = decompose_hermitian(&a, 1e-10).unwrap();
        let got: Vec<_> = terms.iter().map(|t| (t.string.to_string(), t.coefficient)).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(oracle.len(), 2);
        for ((gs, gc), (os, oc)) in got.iter().zip(&oracle) {
            assert_eq!(gs, os);
            assert_abs_diff_eq!(gc, oc, epsilon = 1e-12);
        }
        assert_eq!(got[0].0, "XX");
        assert_eq!(got[1].0, "ZI");
    }

    #[test]
    fn decompose_errors() {
        let non_herm = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(decompose_hermitian(&non_herm, 1e-10), Err(Error::NotHermitian { .. })));
        let three = DMatrix::<Complex64>::identity(3, 3);
        assert_eq!(decompose_hermitian(&three, 1e-10), Err(Error::NotPowerOfTwo(3)));
        let big = DMatrix::<Complex64>::identity(128, 128);
        assert!(matches!(decompose_hermitian(&big, 1e-10), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn reconstruct_cases() {
        let z = reconstruct(&[PauliTerm { coefficient: 1.0, string: ps("Z") }], 1).unwrap();
        assert_eq!(z, materialize_pauli(&ps("Z")).unwrap());
        assert_eq!(reconstruct(&[], 1).unwrap(), DMatrix::zeros(2, 2));
        let mixed = [PauliTerm { coefficient: 1.0, string: ps("ZZ") }];
        assert_eq!(reconstruct(&mixed, 1), Err(Error::MixedQubitCounts(1, 2)));
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(trace_orthogonality_check(&ps("Z"), &ps("Z")).unwrap(), 2.0);
        assert_eq!(trace_orthogonality_check(&ps("X"), &ps("Z")).unwrap(), 0.0);
        assert_eq!(trace_orthogonality_check(&ps("XZ"), &ps("XZ")).unwrap(), 4.0);
        assert!(trace_orthogonality_check(&ps("X"), &ps("XZ")).is_err());
    }

    #[test]
    fn orthogonality_table_two_qubits() {
        for i in 0..16 {
            for j in 0..16 {
                let t = trace_orthogonality_check(&PauliString::from_index(2, i), &PauliString::from_index(2, j)).unwrap();
                let expected = if i == j { 4.0 } else { 0.0 };
                assert_abs_diff_eq!(t, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn weight_and_text() {
        let s = ps("XIZY");
        assert_eq!(s.weight(), 3);
        assert_eq!(s.to_string(), "XIZY");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn observable_json() {
        let obs = LcpObservable::new(vec![
            PauliTerm::new(0.5, ps("XIZY")).unwrap(),
            PauliTerm::new(-1.25, ps("IIIZ")).unwrap(),
        ])
        .unwrap();
        let json = obs.to_json();
        assert_eq!(json, r#"{"n":4,"terms":[{"coeff":0.5,"pauli":"XIZY"},{"coeff":-1.25,"pauli":"IIIZ"}]}"#);
        assert_eq!(LcpObservable::from_json(&json).unwrap(), obs);
        assert!(LcpObservable::from_json(r#"{"n":3,"terms":[{"coeff":1,"pauli":"XX"}]}"#).is_err());
        assert!(LcpObservable::new(vec![
            PauliTerm::new(1.0, ps("X")).unwrap(),
            PauliTerm::new(1.0, ps("XX")).unwrap(),
        ])
        .is_err());
    }
}
