//! Direct measurement of each observable in its own eigenbasis, with
//! Hoeffding shot allocation.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{LcpObservable, PauliString};
use crate::rng::RngSeed;
use crate::sparse::SparseHermitian;
use crate::state::{rotate_to_basis, BornSampler, MeasurementBasisAssignment, StateVector};

/// Qubit limit for the dense eigendecomposition behind LHM measurement.
pub const MAX_EIGEN_QUBITS: usize = 10;

/// Shots per Pauli term (LCP) or per observable (LHM), with the error and
/// failure budget each unit receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootageAllocation {
    pub shots: usize,
    pub epsilon_prime: f64,
    pub delta_prime: f64,
}

/// Hoeffding count for outcomes in `[-bound, bound]`: `ceil(2 bound^2 / eps^2 ln(2/delta))`.
fn hoeffding_shots(bound: f64, epsilon: f64, delta: f64) -> usize {
    ((2.0 * bound * bound / (epsilon * epsilon) * (2.0 / delta).ln()).ceil() as usize).max(1)
}

fn check_budget(m: usize, epsilon: f64, delta: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameters("M must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameters(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameters(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `eps' = eps / (L mu)`, `delta' = delta / (M L)`, `N_j = ceil(2/eps'^2 ln(2/delta'))`.
pub fn allocate_lcp(m: usize, l: usize, epsilon: f64, delta: f64, mu: f64) -> Result<FootageAllocation> {
    check_budget(m, epsilon, delta)?;
    if l == 0 || !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameters(format!("L and mu must be positive, got L={l} mu={mu}")));
    }
    let epsilon_prime = epsilon / (l as f64 * mu);
    let delta_prime = delta / (m * l) as f64;
    Ok(FootageAllocation { shots: hoeffding_shots(1.0, epsilon_prime, delta_prime), epsilon_prime, delta_prime })
}

/// Per-observable allocation for outcomes bounded by `norm_bound` in absolute
/// value: `delta' = delta / M`, `N_m = ceil(2 B^2 / eps^2 ln(2/delta'))`.
pub fn allocate_lhm(m: usize, epsilon: f64, delta: f64, norm_bound: f64) -> Result<FootageAllocation> {
    check_budget(m, epsilon, delta)?;
    if !(norm_bound > 0.0 && norm_bound.is_finite()) {
        return Err(Error::InvalidParameters(format!("norm bound must be positive, got {norm_bound}")));
    }
    let delta_prime = delta / m as f64;
    Ok(FootageAllocation { shots: hoeffding_shots(norm_bound, epsilon, delta_prime), epsilon_prime: epsilon, delta_prime })
}

/// Bit mask of the support of `string` in basis-index order.
fn support_mask(string: &PauliString) -> usize {
    let n = string.num_qubits();
    string.support().fold(0, |acc, (q, _)| acc | 1 << (n - 1 - q))
}

/// Mean eigenvalue of `string` over `shots` measurements in its eigenbasis.
pub fn measure_pauli(state: &StateVector, string: &PauliString, shots: usize, seed: RngSeed) -> Result<f64> {
    if string.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch { expected: state.num_qubits(), found: string.num_qubits() });
    }
    if shots == 0 {
        return Err(Error::InvalidParameters("shot count must be at least 1".into()));
    }
    let mask = support_mask(string);
    if mask == 0 {
        return Ok(1.0);
    }
    let rotated = rotate_to_basis(state, &MeasurementBasisAssignment::for_pauli(string))?;
    let sampler = BornSampler::new(&rotated);
    let mut rng = seed.rng();
    let mut sum = 0i64;
    for _ in 0..shots {
        let odd = (sampler.sample_index(&mut rng) & mask).count_ones() & 1;
        sum += 1 - 2 * odd as i64;
    }
    Ok(sum as f64 / shots as f64)
}

/// `o_i = sum_j c_j mean_j` with each term measured `allocation.shots` times.
/// Term `j` of observable `i` draws from `seed.child(i).child(j)`.
pub fn measure_footage_lcp(
    state: &StateVector,
    observables: &[LcpObservable],
    allocation: &FootageAllocation,
    seed: RngSeed,
) -> Result<Vec<f64>> {
    observables
        .par_iter()
        .enumerate()
        .map(|(i, obs)| {
            let obs_seed = seed.child(i as u64);
            obs.terms()
                .iter()
                .enumerate()
                .map(|(j, t)| Ok(t.coefficient * measure_pauli(state, &t.string, allocation.shots, obs_seed.child(j as u64))?))
                .sum()
        })
        .collect()
}

/// Outcome distribution of a projective measurement of `O`: eigenvalues and
/// their Born probabilities `|<v_i|psi>|^2`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    probabilities: Vec<f64>,
    sampler: BornSampler,
}

impl Spectrum {
    pub fn new(state: &StateVector, o: &SparseHermitian) -> Result<Self> {
        let n = o.num_qubits();
        if n > MAX_EIGEN_QUBITS {
            return Err(Error::DimensionTooLarge { n, max: MAX_EIGEN_QUBITS });
        }
        if state.num_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: state.num_qubits() });
        }
        let eig = SymmetricEigen::try_new(o.to_dense()?, 1e-14, 0)
            .ok_or_else(|| Error::EigensolverFailure(format!("no convergence for dimension {}", o.dim())))?;
        let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
        let probabilities: Vec<f64> =
            eig.eigenvectors.column_iter().map(|v| v.dotc(&psi).norm_sqr()).collect();
        let sampler = BornSampler::from_probabilities(n, &probabilities);
        Ok(Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), probabilities, sampler })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().zip(&self.probabilities).map(|(l, p)| l * p).sum()
    }

    /// Eigenvalues of `shots` independent measurements.
    pub fn sample(&self, shots: usize, seed: RngSeed) -> Vec<f64> {
        let mut rng = seed.rng();
        (0..shots).map(|_| self.eigenvalues[self.sampler.sample_index(&mut rng)]).collect()
    }

    pub fn sample_mean(&self, shots: usize, seed: RngSeed) -> Result<f64> {
        if shots == 0 {
            return Err(Error::InvalidParameters("shot count must be at least 1".into()));
        }
        Ok(self.sample(shots, seed).iter().sum::<f64>() / shots as f64)
    }
}

/// Mean of `shots` projective measurements of `O`.
pub fn measure_footage_lhm(state: &StateVector, o: &SparseHermitian, shots: usize, seed: RngSeed) -> Result<f64> {
    Spectrum::new(state, o)?.sample_mean(shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{gen_lcp_ensemble, gen_random_state, gen_sparse_hermitian, LcpEnsembleSpec};
    use crate::pauli::PauliTerm;
    use crate::sparse::EntryMode;
    use crate::state::expectation_exact;

    #[test]
    fn allocation_examples() {
        let a = allocate_lcp(1, 1, 0.1, 0.05, 0.5).unwrap();
        assert!((a.epsilon_prime - 0.2).abs() < 1e-15);
        assert!((a.delta_prime - 0.05).abs() < 1e-15);
        assert_eq!(a.shots, 185);
        assert_eq!(allocate_lcp(1, 1, 0.1, 0.05, 1.0).unwrap().epsilon_prime, 0.1);
        let one = allocate_lcp(3, 2, 0.2, 0.1, 0.5).unwrap();
        let two = allocate_lcp(6, 2, 0.2, 0.1, 0.5).unwrap();
        let recompute = (2.0 / one.epsilon_prime.powi(2) * (2.0 * 12.0 / 0.1f64).ln()).ceil() as usize;
        assert_eq!(two.shots, recompute);
        assert!(allocate_lcp(0, 1, 0.1, 0.05, 0.5).is_err());
        assert!(allocate_lcp(1, 1, 0.1, 1.0, 0.5).is_err());
    }

    #[test]
    fn allocation_monotone() {
        let base = allocate_lcp(4, 3, 0.1, 0.05, 0.5).unwrap().shots;
        assert!(allocate_lcp(8, 3, 0.1, 0.05, 0.5).unwrap().shots >= base);
        assert!(allocate_lcp(4, 4, 0.1, 0.05, 0.5).unwrap().shots >= base);
        assert!(allocate_lcp(4, 3, 0.05, 0.05, 0.5).unwrap().shots >= base);
        assert!(allocate_lcp(4, 3, 0.1, 0.01, 0.5).unwrap().shots >= base);
        let lhm = allocate_lhm(10, 0.1, 0.01, 2.0 * 2f64.sqrt() * 2.0).unwrap();
        let expected = (16.0 * 4.0 * (2000f64).ln() / 0.01).ceil() as usize;
        assert!(lhm.shots.abs_diff(expected) <= 1);
    }

    #[test]
    fn pauli_on_basis_state() {
        let z0 = LcpObservable::new(vec![PauliTerm::new(1.0, "ZI".parse().unwrap()).unwrap()]).unwrap();
        let alloc = FootageAllocation { shots: 37, epsilon_prime: 0.1, delta_prime: 0.1 };
        let state = StateVector::basis(2, 0).unwrap();
        assert_eq!(measure_footage_lcp(&state, &[z0], &alloc, RngSeed::new(1, 0)).unwrap(), vec![1.0]);
    }

    #[test]
    fn lcp_matches_exact() {
        let state = gen_random_state(2, RngSeed::new(2, 0)).unwrap();
        let obs = gen_lcp_ensemble(&LcpEnsembleSpec::new(3, 2, 1, 2), RngSeed::new(2, 1)).unwrap();
        let alloc = FootageAllocation { shots: 10_000, epsilon_prime: 0.0, delta_prime: 0.0 };
        let est = measure_footage_lcp(&state, &obs, &alloc, RngSeed::new(2, 2)).unwrap();
        for (o, e) in obs.iter().zip(est) {
            assert!((e - expectation_exact(&state, o).unwrap()).abs() < 0.05);
        }
    }

    #[test]
    fn lcp_is_linear_in_coefficients() {
        let state = gen_random_state(2, RngSeed::new(3, 0)).unwrap();
        let s: PauliString = "XY".parse().unwrap();
        let a = LcpObservable::new(vec![PauliTerm::new(1.0, s.clone()).unwrap()]).unwrap();
        let b = LcpObservable::new(vec![PauliTerm::new(-3.0, s).unwrap()]).unwrap();
        let alloc = FootageAllocation { shots: 500, epsilon_prime: 0.0, delta_prime: 0.0 };
        let ea = measure_footage_lcp(&state, &[a], &alloc, RngSeed::new(3, 1)).unwrap()[0];
        let eb = measure_footage_lcp(&state, &[b], &alloc, RngSeed::new(3, 1)).unwrap()[0];
        assert!((eb + 3.0 * ea).abs() < 1e-12);
    }

    #[test]
    fn statement_two_failure_rate() {
        let (m, l, eps, delta) = (3, 2, 0.2, 0.1);
        let alloc = allocate_lcp(m, l, eps, delta, 0.5).unwrap();
        let trials = 200;
        let failures = (0..trials)
            .into_par_iter()
            .filter(|&t| {
                let seed = RngSeed::new(4, t);
                let state = gen_random_state(2, seed.child(0)).unwrap();
                let obs = gen_lcp_ensemble(&LcpEnsembleSpec::new(m, l, 1, 2), seed.child(1)).unwrap();
                let est = measure_footage_lcp(&state, &obs, &alloc, seed.child(2)).unwrap();
                obs.iter().zip(est).any(|(o, e)| (e - expectation_exact(&state, o).unwrap()).abs() > eps)
            })
            .count();
        assert!(failures as f64 / trials as f64 <= delta, "{failures}");
    }

    #[test]
    fn lhm_diagonal_on_zero_state() {
        let d = crate::DenseMatrix::from_fn(4, 4, |r, c| {
            if r == c {
                num_complex::Complex64::new(r as f64 + 0.5, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        });
        let o = SparseHermitian::from_dense(&d, 1e-12).unwrap();
        let state = StateVector::basis(2, 0).unwrap();
        let spectrum = Spectrum::new(&state, &o).unwrap();
        assert!(spectrum.sample(200, RngSeed::new(5, 0)).iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn lhm_matches_exact_and_stays_in_range() {
        let state = gen_random_state(2, RngSeed::new(6, 0)).unwrap();
        let o = gen_sparse_hermitian(2, 4, EntryMode::ComplexOffdiag, RngSeed::new(6, 1)).unwrap();
        let exact = expectation_exact(&state, &o).unwrap();
        let spectrum = Spectrum::new(&state, &o).unwrap();
        assert!((spectrum.mean() - exact).abs() < 1e-10);
        let norm = spectrum.eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let shots = 100_000;
        let samples = spectrum.sample(shots, RngSeed::new(6, 2));
        let mean = samples.iter().sum::<f64>() / shots as f64;
        assert!((mean - exact).abs() <= 4.0 * norm / (shots as f64).sqrt());
        let (lo, hi) = spectrum.eigenvalues().iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(samples.iter().all(|&v| v >= lo && v <= hi));
        // total variation between empirical and exact outcome frequencies
        let tv: f64 = spectrum
            .eigenvalues()
            .iter()
            .zip(spectrum.probabilities())
            .map(|(l, p)| (samples.iter().filter(|&&s| s == *l).count() as f64 / shots as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "{tv}");
        let direct = measure_footage_lhm(&state, &o, 1000, RngSeed::new(6, 3)).unwrap();
        assert!(direct >= lo && direct <= hi);
    }

    #[test]
    fn lhm_size_guard() {
        let o = SparseHermitian::identity(11);
        let state = StateVector::basis(11, 0).unwrap();
        assert!(matches!(Spectrum::new(&state, &o), Err(Error::DimensionTooLarge { .. })));
    }
}
