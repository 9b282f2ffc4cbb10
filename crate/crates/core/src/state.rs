//! Pure-state simulation: basis rotations, Born-rule sampling and exact
//! expectation values.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::pauli::{LcpObservable, PauliAxis, PauliString};
use crate::rng::{RngSeed, SeededRng};
use crate::sparse::SparseHermitian;

pub const MAX_STATE_QUBITS: usize = 14;
const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = crate::pauli::qubits_for_dim(amplitudes.len())?;
        if n == 0 {
            return Err(Error::InvalidParameters("state needs at least one qubit".into()));
        }
        if n > MAX_STATE_QUBITS {
            return Err(Error::DimensionTooLarge { n, max: MAX_STATE_QUBITS });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameters(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n, amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::InvalidParameters(format!("basis index {index} out of range")))? =
            Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `tr(rho^2)` for `rho = |psi><psi|`.
    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum_ij |psi_i|^2 |psi_j|^2
        let p: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        p * p
    }

    /// Dense density matrix `|psi><psi|`.
    pub fn density(&self) -> crate::DenseMatrix {
        let d = self.dim();
        crate::DenseMatrix::from_fn(d, d, |r, c| self.amplitudes[r] * self.amplitudes[c].conj())
    }

    fn apply_single_qubit(&mut self, qubit: usize, u: &[[Complex64; 2]; 2]) {
        let bit = 1usize << (self.n - 1 - qubit);
        for i in 0..self.dim() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }
}

/// Per-qubit measurement axis, never identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementBasisAssignment {
    axes: Vec<PauliAxis>,
}

impl MeasurementBasisAssignment {
    pub fn new(axes: Vec<PauliAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameters("empty basis assignment".into()));
        }
        if axes.contains(&PauliAxis::I) {
            return Err(Error::InvalidParameters("basis assignment may not contain I".into()));
        }
        Ok(Self { axes })
    }

    pub fn uniform(n: usize, axis: PauliAxis) -> Result<Self> {
        Self::new(vec![axis; n])
    }

    /// Eigenbasis of a Pauli string; identity slots are measured in Z.
    pub fn for_pauli(string: &PauliString) -> Self {
        let axes = string.axes().iter().map(|a| if *a == PauliAxis::I { PauliAxis::Z } else { *a }).collect();
        Self { axes }
    }

    pub fn random(n: usize, rng: &mut SeededRng) -> Self {
        Self { axes: (0..n).map(|_| PauliAxis::MEASURABLE[rng.below(3)]).collect() }
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
}

impl fmt::Display for MeasurementBasisAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.axes.iter().try_for_each(|a| write!(f, "{}", a.as_char()))
    }
}

impl FromStr for MeasurementBasisAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| PauliAxis::from_char(c).ok_or_else(|| Error::Parse(format!("bad basis character '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

/// Measured bits, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShotOutcome {
    bits: Vec<u8>,
}

impl ShotOutcome {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::InvalidParameters("outcome bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        Self { bits: (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect() }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, qubit: usize) -> u8 {
        self.bits[qubit]
    }

    pub fn num_qubits(&self) -> usize {
        self.bits.len()
    }

    /// `(-1)^bit` for the given qubit.
    pub fn eigenvalue(&self, qubit: usize) -> f64 {
        if self.bits[qubit] == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for ShotOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits.iter().try_for_each(|b| write!(f, "{b}"))
    }
}

impl FromStr for ShotOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("bad outcome bit '{c}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

/// Single-qubit unitary taking the axis eigenbasis to the computational
/// basis: identity for Z, H for X, H S^dagger for Y.
pub fn basis_change(axis: PauliAxis) -> [[Complex64; 2]; 2] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let ih = Complex64::new(0.0, FRAC_1_SQRT_2);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        PauliAxis::I | PauliAxis::Z => [[one, zero], [zero, one]],
        PauliAxis::X => [[h, h], [h, -h]],
        // H * diag(1, -i)
        PauliAxis::Y => [[h, -ih], [h, ih]],
    }
}

fn adjoint2(u: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}

fn check_dims(state: &StateVector, n: usize) -> Result<()> {
    if state.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: state.num_qubits(), found: n });
    }
    Ok(())
}

/// `|psi> -> U |psi>` with `U` mapping each chosen axis to Z.
pub fn rotate_to_basis(state: &StateVector, basis: &MeasurementBasisAssignment) -> Result<StateVector> {
    check_dims(state, basis.num_qubits())?;
    let mut out = state.clone();
    for (q, axis) in basis.axes().iter().enumerate() {
        if *axis != PauliAxis::Z {
            out.apply_single_qubit(q, &basis_change(*axis));
        }
    }
    Ok(out)
}

/// Inverse of [`rotate_to_basis`].
pub fn rotate_from_basis(state: &StateVector, basis: &MeasurementBasisAssignment) -> Result<StateVector> {
    check_dims(state, basis.num_qubits())?;
    let mut out = state.clone();
    for (q, axis) in basis.axes().iter().enumerate() {
        if *axis != PauliAxis::Z {
            out.apply_single_qubit(q, &adjoint2(&basis_change(*axis)));
        }
    }
    Ok(out)
}

/// Inverse-CDF sampler over the computational-basis distribution of a state.
#[derive(Debug, Clone)]
pub struct BornSampler {
    n: usize,
    cdf: Vec<f64>,
}

impl BornSampler {
    pub fn new(state: &StateVector) -> Self {
        Self::from_probabilities(state.num_qubits(), &state.probabilities())
    }

    pub(crate) fn from_probabilities(n: usize, probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Self { n, cdf }
    }

    pub fn sample_index(&self, rng: &mut SeededRng) -> usize {
        let u = rng.uniform();
        self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1)
    }

    pub fn sample(&self, rng: &mut SeededRng) -> ShotOutcome {
        ShotOutcome::from_index(self.n, self.sample_index(rng))
    }
}

/// One computational-basis measurement of `state`.
pub fn sample_outcome(state: &StateVector, seed: RngSeed) -> ShotOutcome {
    BornSampler::new(state).sample(&mut seed.rng())
}

/// Observables with an exact `<psi|O|psi>`.
pub trait Observable {
    fn num_qubits(&self) -> usize;

    /// `<psi|O|psi>` as a complex number; imaginary part vanishes for Hermitian `O`.
    fn braket(&self, state: &StateVector) -> Complex64;
}

pub(crate) fn pauli_braket(string: &PauliString, state: &StateVector) -> Complex64 {
    let act = string.action();
    let amps = state.amplitudes();
    (0..amps.len()).map(|x| amps[x ^ act.flip].conj() * act.phase(x) * amps[x]).sum()
}

impl Observable for PauliString {
    fn num_qubits(&self) -> usize {
        PauliString::num_qubits(self)
    }

    fn braket(&self, state: &StateVector) -> Complex64 {
        pauli_braket(self, state)
    }
}

impl Observable for LcpObservable {
    fn num_qubits(&self) -> usize {
        LcpObservable::num_qubits(self)
    }

    fn braket(&self, state: &StateVector) -> Complex64 {
        self.terms().iter().map(|t| pauli_braket(&t.string, state) * t.coefficient).sum()
    }
}

impl Observable for SparseHermitian {
    fn num_qubits(&self) -> usize {
        SparseHermitian::num_qubits(self)
    }

    fn braket(&self, state: &StateVector) -> Complex64 {
        let amps = state.amplitudes();
        let o_psi = self.matvec(amps);
        amps.iter().zip(&o_psi).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Exact `tr(O rho)`.
pub fn expectation_exact<O: Observable + ?Sized>(state: &StateVector, observable: &O) -> Result<f64> {
    if observable.num_qubits() > crate::pauli::MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge { n: observable.num_qubits(), max: crate::pauli::MAX_DENSE_QUBITS });
    }
    check_dims(state, observable.num_qubits())?;
    Ok(observable.braket(state).re)
}
