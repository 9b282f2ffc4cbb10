//! Classical-shadow acquisition and estimation.
//!
//! Snapshots record a random per-qubit Pauli basis and the measured bits.
//! Pauli terms are estimated by matching the term against each snapshot's
//! basis; dense observables go through the single-qubit inverse channel
//! `3 U^dagger |b><b| U - I` and a sparse trace.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{LcpObservable, PauliAxis, PauliString, MAX_DENSE_QUBITS};
use crate::rng::RngSeed;
use crate::sparse::SparseHermitian;
use crate::state::{basis_change, rotate_to_basis, BornSampler, MeasurementBasisAssignment, ShotOutcome, StateVector};
use crate::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowSnapshot {
    basis: MeasurementBasisAssignment,
    outcome: ShotOutcome,
}

impl ShadowSnapshot {
    pub fn new(basis: MeasurementBasisAssignment, outcome: ShotOutcome) -> Result<Self> {
        if basis.num_qubits() != outcome.num_qubits() {
            return Err(Error::DimensionMismatch { expected: basis.num_qubits(), found: outcome.num_qubits() });
        }
        Ok(Self { basis, outcome })
    }

    pub fn basis(&self) -> &MeasurementBasisAssignment {
        &self.basis
    }

    pub fn outcome(&self) -> &ShotOutcome {
        &self.outcome
    }

    pub fn num_qubits(&self) -> usize {
        self.basis.num_qubits()
    }

    /// Product of `(-1)^bit` over the support of `string` if every
    /// non-identity factor equals the measured axis.
    pub fn matched_product(&self, string: &PauliString) -> Option<f64> {
        let mut product = 1.0;
        for (q, axis) in string.support() {
            if self.basis.axis(q) != axis {
                return None;
            }
            product *= self.outcome.eigenvalue(q);
        }
        Some(product)
    }

    /// Single-shot inverse-channel estimate of `tr(P rho)`: `3^w` times the
    /// matched product, zero when any factor mismatches.
    pub fn inverse_channel_value(&self, string: &PauliString) -> f64 {
        self.matched_product(string).map_or(0.0, |p| 3f64.powi(string.weight() as i32) * p)
    }

    /// `3 v v^dagger - I` for qubit `q`, where `v = U^dagger |b>`.
    pub fn local_inverse(&self, q: usize) -> [[Complex64; 2]; 2] {
        single_qubit_shadow(self.basis.axis(q), self.outcome.bit(q))
    }

    /// `tr(O rho_hat)` without materializing `rho_hat`.
    pub fn trace_with(&self, observable: &SparseHermitian) -> f64 {
        let n = self.num_qubits();
        let locals: Vec<_> = (0..n).map(|q| self.local_inverse(q)).collect();
        let entry = |row: usize, col: usize| -> Complex64 {
            let mut acc = Complex64::new(1.0, 0.0);
            for (q, m) in locals.iter().enumerate() {
                let shift = n - 1 - q;
                acc *= m[(row >> shift) & 1][(col >> shift) & 1];
            }
            acc
        };
        // tr(O rho) = sum_{r,c} O[r,c] rho[c,r]
        let mut total = Complex64::new(0.0, 0.0);
        for (r, row) in observable.rows().iter().enumerate() {
            for (c, v) in row {
                total += v * entry(*c, r);
            }
        }
        total.re
    }
}

fn single_qubit_shadow(axis: PauliAxis, bit: u8) -> [[Complex64; 2]; 2] {
    let u = basis_change(axis);
    let b = bit as usize;
    let v = [u[b][0].conj(), u[b][1].conj()];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = v[r] * v[c].conj() * 3.0;
        }
        m[r][r] -= 1.0;
    }
    m
}

/// Classical shadow of a state: `T` snapshots on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowSet {
    n: usize,
    seed: Option<RngSeed>,
    snapshots: Vec<ShadowSnapshot>,
}

impl ShadowSet {
    pub fn new(snapshots: Vec<ShadowSnapshot>, seed: Option<RngSeed>) -> Result<Self> {
        let n = snapshots
            .first()
            .ok_or_else(|| Error::InvalidParameters("shadow set needs at least one snapshot".into()))?
            .num_qubits();
        if let Some(s) = snapshots.iter().find(|s| s.num_qubits() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: s.num_qubits() });
        }
        Ok(Self { n, seed, snapshots })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[ShadowSnapshot] {
        &self.snapshots
    }

    pub fn seed(&self) -> Option<RngSeed> {
        self.seed
    }

    /// `# n=<n> T=<T> seed=<seed>` followed by `BASIS BITS` lines.
    pub fn to_text(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let mut out = format!("# n={} T={} seed={}\n", self.n, self.len(), seed);
        for s in &self.snapshots {
            let _ = writeln!(out, "{} {}", s.basis, s.outcome);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header_n = None;
        let mut header_t = None;
        let mut seed = None;
        let mut snapshots = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                for field in h.split_whitespace() {
                    let bad = || Error::Parse(format!("line {}: bad header field '{field}'", lineno + 1));
                    match field.split_once('=') {
                        Some(("n", v)) => header_n = Some(v.parse::<usize>().map_err(|_| bad())?),
                        Some(("T", v)) => header_t = Some(v.parse::<usize>().map_err(|_| bad())?),
                        Some(("seed", "none")) => {}
                        Some(("seed", v)) => seed = Some(v.parse()?),
                        _ => {}
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(b), Some(o), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected 'BASIS BITS'", lineno + 1)));
            };
            snapshots.push(ShadowSnapshot::new(b.parse()?, o.parse()?)?);
        }
        let set = Self::new(snapshots, seed)?;
        if header_n.is_some_and(|n| n != set.n) {
            return Err(Error::DimensionMismatch { expected: header_n.unwrap(), found: set.n });
        }
        if header_t.is_some_and(|t| t != set.len()) {
            return Err(Error::Parse(format!("header T={} but {} snapshots", header_t.unwrap(), set.len())));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Matched-shot sum divided by the number of matches.
    #[default]
    Ratio,
    /// `3^w`-weighted matched sum divided by the group size.
    InverseChannel,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(Convention::Ratio),
            "inverse_channel" | "inverse-channel" => Ok(Convention::InverseChannel),
            other => Err(Error::Parse(format!("unknown estimator convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub groups: usize,
    pub convention: Convention,
}

impl EstimatorConfig {
    pub fn new(groups: usize, convention: Convention) -> Self {
        Self { groups, convention }
    }

    /// `K = ceil(2 ln(2M/delta))`.
    pub fn default_groups(observables: usize, delta: f64) -> usize {
        ((2.0 * (2.0 * observables as f64 / delta).ln()).ceil() as usize).max(1)
    }
}

/// Snapshot acquisition: uniform random X/Y/Z per qubit, rotate, measure.
/// Shot `i` draws from `seed.child(i)`, independent of thread count.
pub fn acquire_shadows(state: &StateVector, shots: usize, seed: RngSeed) -> Result<ShadowSet> {
    if shots == 0 {
        return Err(Error::InvalidParameters("shot count must be at least 1".into()));
    }
    let n = state.num_qubits();
    let snapshots = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let basis = MeasurementBasisAssignment::random(n, &mut rng);
            let rotated = rotate_to_basis(state, &basis)?;
            let outcome = BornSampler::new(&rotated).sample(&mut rng);
            Ok(ShadowSnapshot { basis, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    ShadowSet::new(snapshots, Some(seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimate {
    pub sum: f64,
    pub match_count: usize,
    pub shots: usize,
    pub estimate: f64,
}

/// Matching estimate of `tr(P rho)` from a group of snapshots.
pub fn estimate_term(snapshots: &[ShadowSnapshot], string: &PauliString, convention: Convention) -> Result<TermEstimate> {
    if let Some(s) = snapshots.iter().find(|s| s.num_qubits() != string.num_qubits()) {
        return Err(Error::DimensionMismatch { expected: string.num_qubits(), found: s.num_qubits() });
    }
    let scale = match convention {
        Convention::Ratio => 1.0,
        Convention::InverseChannel => 3f64.powi(string.weight() as i32),
    };
    let (mut sum, mut match_count) = (0.0, 0usize);
    for s in snapshots {
        if let Some(p) = s.matched_product(string) {
            sum += scale * p;
            match_count += 1;
        }
    }
    let estimate = match convention {
        Convention::Ratio if match_count == 0 => return Err(Error::NoMatches),
        Convention::Ratio => sum / match_count as f64,
        Convention::InverseChannel if snapshots.is_empty() => 0.0,
        Convention::InverseChannel => sum / snapshots.len() as f64,
    };
    Ok(TermEstimate { sum, match_count, shots: snapshots.len(), estimate })
}

/// Median with the mean of the two central values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 0 { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}

fn groups(set: &ShadowSet, k: usize) -> Result<impl Iterator<Item = &[ShadowSnapshot]>> {
    if k == 0 || k > set.len() {
        return Err(Error::InvalidParameters(format!("group count {k} must lie in 1..={}", set.len())));
    }
    let size = set.len() / k;
    Ok(set.snapshots[..size * k].chunks(size))
}

/// Median over `K` contiguous groups of `floor(T/K)` snapshots. Groups with
/// no matches (ratio convention) are skipped.
pub fn median_of_means(shadows: &ShadowSet, string: &PauliString, config: &EstimatorConfig) -> Result<f64> {
    let mut estimates = Vec::with_capacity(config.groups);
    for group in groups(shadows, config.groups)? {
        match estimate_term(group, string, config.convention) {
            Ok(t) => estimates.push(t.estimate),
            Err(Error::NoMatches) => {}
            Err(e) => return Err(e),
        }
    }
    median(&estimates).ok_or(Error::AllGroupsEmpty)
}

/// `o_i = sum_j c_j * median_of_means(P_j)` for every observable.
pub fn estimate_lcp(shadows: &ShadowSet, observables: &[LcpObservable], config: &EstimatorConfig) -> Result<Vec<f64>> {
    observables
        .par_iter()
        .map(|obs| {
            if obs.num_qubits() != shadows.num_qubits() {
                return Err(Error::DimensionMismatch { expected: shadows.num_qubits(), found: obs.num_qubits() });
            }
            obs.terms()
                .iter()
                .map(|t| median_of_means(shadows, &t.string, config).map(|e| t.coefficient * e))
                .sum()
        })
        .collect()
}

/// Dense `rho_hat = kron_q (3 U_q^dagger |b_q><b_q| U_q - I)`.
pub fn snapshot_density(snapshot: &ShadowSnapshot) -> Result<DenseMatrix> {
    let n = snapshot.num_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_DENSE_QUBITS });
    }
    let mut acc = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in 0..n {
        let m = snapshot.local_inverse(q);
        acc = acc.kronecker(&DMatrix::from_fn(2, 2, |r, c| m[r][c]));
    }
    Ok(acc)
}

/// Median over groups of the mean `tr(O rho_hat)`.
pub fn estimate_lhm(shadows: &ShadowSet, observables: &[SparseHermitian], config: &EstimatorConfig) -> Result<Vec<f64>> {
    if shadows.num_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::DimensionTooLarge { n: shadows.num_qubits(), max: MAX_DENSE_QUBITS });
    }
    let group_list: Vec<&[ShadowSnapshot]> = groups(shadows, config.groups)?.collect();
    observables
        .par_iter()
        .map(|obs| {
            if obs.num_qubits() != shadows.num_qubits() {
                return Err(Error::DimensionMismatch { expected: shadows.num_qubits(), found: obs.num_qubits() });
            }
            let means: Vec<f64> = group_list
                .iter()
                .map(|g| g.iter().map(|s| s.trace_with(obs)).sum::<f64>() / g.len() as f64)
                .collect();
            median(&means).ok_or(Error::AllGroupsEmpty)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{gen_random_state, gen_sparse_hermitian};
    use crate::pauli::{materialize_pauli, PauliTerm};
    use crate::sparse::EntryMode;
    use crate::state::expectation_exact;

    fn snap(basis: &str, bits: &str) -> ShadowSnapshot {
        ShadowSnapshot::new(basis.parse().unwrap(), bits.parse().unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn snapshot_density_examples() {
        let z0 = snapshot_density(&snap("Z", "0")).unwrap();
        assert_eq!(z0, DMatrix::from_row_slice(2, 2, &[c(2., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]));
        let x0 = snapshot_density(&snap("X", "0")).unwrap();
        let expected = [c(0.5, 0.), c(1.5, 0.), c(1.5, 0.), c(0.5, 0.)];
        for (a, b) in x0.iter().zip(DMatrix::from_row_slice(2, 2, &expected).iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // Y, bit 0: 3|+i><+i| - I
        let y0 = snapshot_density(&snap("Y", "0")).unwrap();
        assert!((y0[(0, 1)] - c(0.0, -1.5)).norm() < 1e-12);
    }

    #[test]
    fn snapshot_traces_are_one() {
        let state = gen_random_state(3, RngSeed::new(1, 0)).unwrap();
        let set = acquire_shadows(&state, 200, RngSeed::new(2, 0)).unwrap();
        for s in set.snapshots() {
            let d = snapshot_density(s).unwrap();
            assert!((d.trace() - c(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(d.adjoint(), d);
        }
    }

    #[test]
    fn basis_frequencies_uniform() {
        let state = gen_random_state(2, RngSeed::new(3, 0)).unwrap();
        let set = acquire_shadows(&state, 30_000, RngSeed::new(3, 1)).unwrap();
        for q in 0..2 {
            for axis in PauliAxis::MEASURABLE {
                let f = set.snapshots().iter().filter(|s| s.basis().axis(q) == axis).count() as f64 / 30_000.0;
                assert!((f - 1.0 / 3.0).abs() < 0.01, "{axis:?} {f}");
            }
        }
    }

    #[test]
    fn zero_state_z_outcomes() {
        let state = StateVector::basis(2, 0).unwrap();
        let set = acquire_shadows(&state, 2_000, RngSeed::new(4, 0)).unwrap();
        for s in set.snapshots() {
            for q in 0..2 {
                if s.basis().axis(q) == PauliAxis::Z {
                    assert_eq!(s.outcome().bit(q), 0);
                }
            }
        }
    }

    #[test]
    fn match_probability_is_third_to_the_w() {
        let state = gen_random_state(3, RngSeed::new(5, 0)).unwrap();
        let shots = 60_000;
        let set = acquire_shadows(&state, shots, RngSeed::new(5, 1)).unwrap();
        for (w, s) in [(1usize, "XII"), (2, "XYI"), (3, "XYZ")] {
            let string: PauliString = s.parse().unwrap();
            let hits = set.snapshots().iter().filter(|sn| sn.matched_product(&string).is_some()).count();
            let p = 3f64.powi(-(w as i32));
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let f = hits as f64 / shots as f64;
            assert!((f - p).abs() <= 3.0 * sigma, "w={w}: {f} vs {p}");
        }
    }

    #[test]
    fn term_estimate_trivial_cases() {
        let state = StateVector::basis(1, 0).unwrap();
        let snaps: Vec<_> = (0..10).map(|_| snap("Z", "0")).collect();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(estimate_term(&snaps, &z, Convention::Ratio).unwrap().estimate, 1.0);
        let set = acquire_shadows(&state, 30_000, RngSeed::new(6, 0)).unwrap();
        let ic = estimate_term(set.snapshots(), &z, Convention::InverseChannel).unwrap();
        assert!((ic.estimate - 1.0).abs() < 0.05);
        let zz: PauliString = "ZZ".parse().unwrap();
        let xx_only: Vec<_> = (0..5).map(|_| snap("XX", "01")).collect();
        assert_eq!(estimate_term(&xx_only, &zz, Convention::Ratio), Err(Error::NoMatches));
        assert_eq!(estimate_term(&xx_only, &zz, Convention::InverseChannel).unwrap().estimate, 0.0);
    }

    #[test]
    fn both_conventions_track_exact_value() {
        let state = gen_random_state(2, RngSeed::new(7, 0)).unwrap();
        let set = acquire_shadows(&state, 100_000, RngSeed::new(7, 1)).unwrap();
        for s in ["XI", "IY", "ZI"] {
            let p: PauliString = s.parse().unwrap();
            let exact = expectation_exact(&state, &p).unwrap();
            let r = estimate_term(set.snapshots(), &p, Convention::Ratio).unwrap().estimate;
            let i = estimate_term(set.snapshots(), &p, Convention::InverseChannel).unwrap().estimate;
            assert!((r - exact).abs() < 0.03, "{s} ratio {r} vs {exact}");
            assert!((i - exact).abs() < 0.03, "{s} inverse {i} vs {exact}");
            assert!((r - i).abs() < 0.02, "{s} conventions {r} vs {i}");
        }
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[1.0, 1.0, 1.0]), Some(1.0));
        assert_eq!(median(&[10.0, 2.0, 6.0]), Some(6.0));
        assert_eq!(median(&[2.0, 14.0, 6.0, 10.0]), Some(8.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn median_of_means_groups() {
        let z: PauliString = "Z".parse().unwrap();
        // Groups of 2: [+1,+1], [-1,-1], [+1,-1] -> estimates 1, -1, 0.
        let snaps = vec![snap("Z", "0"), snap("Z", "0"), snap("Z", "1"), snap("Z", "1"), snap("Z", "0"), snap("Z", "1"), snap("Z", "0")];
        let set = ShadowSet::new(snaps, None).unwrap();
        let cfg = EstimatorConfig::new(3, Convention::Ratio);
        assert_eq!(median_of_means(&set, &z, &cfg).unwrap(), 0.0);
        assert!(median_of_means(&set, &z, &EstimatorConfig::new(8, Convention::Ratio)).is_err());
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(median_of_means(&set, &x, &cfg), Err(Error::AllGroupsEmpty));
        // Group without matches is dropped: [X],[Z0],[Z1] + [Z0] -> {1,-1,1}
        let set2 = ShadowSet::new(vec![snap("X", "0"), snap("Z", "0"), snap("Z", "1"), snap("Z", "0")], None).unwrap();
        assert_eq!(median_of_means(&set2, &z, &EstimatorConfig::new(4, Convention::Ratio)).unwrap(), 1.0);
    }

    #[test]
    fn lcp_linearity_and_determinism() {
        let state = gen_random_state(3, RngSeed::new(8, 0)).unwrap();
        let set = acquire_shadows(&state, 5_000, RngSeed::new(8, 1)).unwrap();
        let p: PauliString = "XZI".parse().unwrap();
        let single = LcpObservable::new(vec![PauliTerm::new(1.0, p.clone()).unwrap()]).unwrap();
        let doubled = LcpObservable::new(vec![PauliTerm::new(2.0, p).unwrap()]).unwrap();
        let cfg = EstimatorConfig::new(7, Convention::Ratio);
        let est = estimate_lcp(&set, &[single, doubled.clone(), doubled], &cfg).unwrap();
        assert!((est[1] - 2.0 * est[0]).abs() < 1e-12);
        assert_eq!(est[1], est[2]);
    }

    #[test]
    fn inverse_channel_matches_dense_trace() {
        let state = gen_random_state(2, RngSeed::new(9, 0)).unwrap();
        let set = acquire_shadows(&state, 500, RngSeed::new(9, 1)).unwrap();
        for idx in 1..16 {
            let p = PauliString::from_index(2, idx);
            let dense = materialize_pauli(&p).unwrap();
            for s in set.snapshots() {
                let oracle = (&dense * snapshot_density(s).unwrap()).trace();
                assert!((s.inverse_channel_value(&p) - oracle.re).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sparse_trace_matches_dense() {
        let o = gen_sparse_hermitian(3, 3, EntryMode::ComplexOffdiag, RngSeed::new(10, 0)).unwrap();
        let dense = o.to_dense().unwrap();
        let state = gen_random_state(3, RngSeed::new(10, 1)).unwrap();
        let set = acquire_shadows(&state, 50, RngSeed::new(10, 2)).unwrap();
        for s in set.snapshots() {
            let oracle = (&dense * snapshot_density(s).unwrap()).trace();
            assert!((s.trace_with(&o) - oracle.re).abs() < 1e-10);
        }
    }

    #[test]
    fn lhm_identity_is_one() {
        let state = gen_random_state(3, RngSeed::new(11, 0)).unwrap();
        let set = acquire_shadows(&state, 300, RngSeed::new(11, 1)).unwrap();
        let est = estimate_lhm(&set, &[SparseHermitian::identity(3)], &EstimatorConfig::new(5, Convention::InverseChannel)).unwrap();
        assert!((est[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lhm_estimate_and_unbiasedness() {
        let state = gen_random_state(2, RngSeed::new(12, 0)).unwrap();
        let o = gen_sparse_hermitian(2, 4, EntryMode::ComplexOffdiag, RngSeed::new(12, 1)).unwrap();
        let exact = expectation_exact(&state, &o).unwrap();
        let shots = 100_000;
        let set = acquire_shadows(&state, shots, RngSeed::new(12, 2)).unwrap();
        let est = estimate_lhm(&set, std::slice::from_ref(&o), &EstimatorConfig::new(9, Convention::InverseChannel)).unwrap();
        assert!((est[0] - exact).abs() < 0.05, "{} vs {exact}", est[0]);
        let vals: Vec<f64> = set.snapshots().iter().map(|s| s.trace_with(&o)).collect();
        let mean = vals.iter().sum::<f64>() / shots as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (shots - 1) as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * sd / (shots as f64).sqrt());
    }

    #[test]
    fn text_round_trip() {
        let state = gen_random_state(3, RngSeed::new(13, 0)).unwrap();
        let set = acquire_shadows(&state, 20, RngSeed::new(13, 1)).unwrap();
        let text = set.to_text();
        assert!(text.starts_with("# n=3 T=20 seed=13:1\n"));
        assert_eq!(ShadowSet::from_text(&text).unwrap(), set);
        assert!(ShadowSet::from_text("# n=2 T=1\nXZ 0\n").is_err());
        assert!(ShadowSet::from_text("# n=2 T=2\nXZ 01\n").is_err());
        assert!(ShadowSet::from_text("XI 01\n").is_err());
    }

    #[test]
    fn default_groups() {
        // ceil(2 ln(2*5/0.05)) = ceil(10.597) = 11
        assert_eq!(EstimatorConfig::default_groups(5, 0.05), 11);
    }
}
