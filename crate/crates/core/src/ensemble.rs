//! Seeded random observables and states.

use std::collections::HashSet;

use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{LcpObservable, PauliAxis, PauliString, PauliTerm};
use crate::rng::{RngSeed, SeededRng};
use crate::sparse::{EntryMode, SparseHermitian};
use crate::state::{StateVector, MAX_STATE_QUBITS};

/// Generation limit for sparse observables (row lists are held in memory).
pub const MAX_SPARSE_QUBITS: usize = 20;

/// `M` observables of `L` weight-`w` terms on `n` qubits. Coefficients are
/// `N(0, coeff_variance)` rejected outside `[-coeff_truncation, coeff_truncation]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcpEnsembleSpec {
    pub observables: usize,
    pub terms: usize,
    pub weight: usize,
    pub qubits: usize,
    pub coeff_variance: f64,
    pub coeff_truncation: f64,
}

impl LcpEnsembleSpec {
    pub fn new(observables: usize, terms: usize, weight: usize, qubits: usize) -> Self {
        Self { observables, terms, weight, qubits, coeff_variance: 0.5, coeff_truncation: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.observables == 0 || self.terms == 0 {
            return Err(Error::InvalidSpec("M and L must be at least 1".into()));
        }
        if self.weight == 0 || self.weight > self.qubits {
            return Err(Error::InvalidSpec(format!("weight {} must lie in 1..={}", self.weight, self.qubits)));
        }
        if !(self.coeff_variance > 0.0 && self.coeff_variance.is_finite()) {
            return Err(Error::InvalidSpec("coefficient variance must be positive".into()));
        }
        if !(self.coeff_truncation > 0.0) {
            return Err(Error::InvalidSpec("coefficient truncation must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhmEnsembleSpec {
    pub observables: usize,
    pub sparsity: usize,
    pub qubits: usize,
    pub mode: EntryMode,
}

impl LhmEnsembleSpec {
    pub fn new(observables: usize, sparsity: usize, qubits: usize, mode: EntryMode) -> Self {
        Self { observables, sparsity, qubits, mode }
    }

    pub fn validate(&self) -> Result<()> {
        if self.observables == 0 {
            return Err(Error::InvalidSpec("M must be at least 1".into()));
        }
        if self.qubits == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if self.qubits > MAX_SPARSE_QUBITS {
            return Err(Error::DimensionTooLarge { n: self.qubits, max: MAX_SPARSE_QUBITS });
        }
        let dim = 1usize << self.qubits;
        if self.sparsity == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".into()));
        }
        if self.sparsity > dim {
            return Err(Error::SparsityTooLarge { k: self.sparsity, dim });
        }
        Ok(())
    }
}

fn truncated_coefficient(rng: &mut SeededRng, std_dev: f64, bound: f64) -> f64 {
    loop {
        let c = rng.normal(0.0, std_dev);
        if c.abs() <= bound {
            return c;
        }
    }
}

fn random_term(rng: &mut SeededRng, spec: &LcpEnsembleSpec) -> PauliTerm {
    let coefficient = truncated_coefficient(rng, spec.coeff_variance.sqrt(), spec.coeff_truncation);
    let mut support: Vec<usize> = index::sample(rng, spec.qubits, spec.weight).into_vec();
    support.sort_unstable();
    let mut axes = vec![PauliAxis::I; spec.qubits];
    for q in support {
        axes[q] = PauliAxis::MEASURABLE[rng.below(3)];
    }
    PauliTerm { coefficient, string: PauliString::new(axes).expect("n >= 1") }
}

/// Observable `i` draws from `seed.child(i)`, so any subset can be regenerated alone.
pub fn gen_lcp_observable(spec: &LcpEnsembleSpec, seed: RngSeed, index: usize) -> Result<LcpObservable> {
    spec.validate()?;
    let mut rng = seed.child(index as u64).rng();
    let terms = (0..spec.terms).map(|_| random_term(&mut rng, spec)).collect();
    LcpObservable::new(terms)
}

pub fn gen_lcp_ensemble(spec: &LcpEnsembleSpec, seed: RngSeed) -> Result<Vec<LcpObservable>> {
    spec.validate()?;
    (0..spec.observables).map(|i| gen_lcp_observable(spec, seed, i)).collect()
}

fn random_entry(rng: &mut SeededRng, mode: EntryMode) -> Complex64 {
    match mode {
        EntryMode::Real => Complex64::new(rng.standard_normal(), 0.0),
        EntryMode::ComplexOffdiag => {
            let re = rng.standard_normal();
            Complex64::new(re, rng.standard_normal())
        }
    }
}

/// Edges of a random simple graph whose vertex degrees follow `degrees`.
///
/// Stubs are paired uniformly at random; self-loops and repeated edges are
/// then removed by random double-edge swaps. Pairings that cannot be repaired
/// within the swap budget are dropped. An odd degree sum loses one stub from a
/// random vertex. Dense targets are built as the complement of a sparse graph.
fn random_graph(mut degrees: Vec<usize>, rng: &mut SeededRng) -> Vec<(usize, usize)> {
    let dim = degrees.len();
    let mut total: usize = degrees.iter().sum();
    if total % 2 == 1 {
        let nonzero: Vec<usize> = (0..dim).filter(|&v| degrees[v] > 0).collect();
        degrees[nonzero[rng.below(nonzero.len())]] -= 1;
        total -= 1;
    }
    if dim > 1 && 2 * total > dim * (dim - 1) {
        let complement: Vec<usize> = degrees.iter().map(|d| dim - 1 - d).collect();
        let missing: HashSet<(usize, usize)> = random_graph(complement, rng).into_iter().collect();
        return (0..dim)
            .flat_map(|r| (r + 1..dim).map(move |c| (r, c)))
            .filter(|e| !missing.contains(e))
            .collect();
    }
    let mut stubs: Vec<usize> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edges: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| norm(p[0], p[1])).collect();
    let mut present = HashSet::with_capacity(edges.len());
    let mut bad = Vec::new();
    let mut is_bad = vec![false; edges.len()];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a == b || !present.insert((a, b)) {
            bad.push(i);
            is_bad[i] = true;
        }
    }
    let mut budget = 1000 + 100 * edges.len();
    while let Some(&bi) = bad.last() {
        if budget == 0 {
            break;
        }
        budget -= 1;
        let oi = rng.below(edges.len());
        if is_bad[oi] {
            continue;
        }
        let (a, b) = edges[bi];
        let (mut c, mut d) = edges[oi];
        if rng.bernoulli(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        let (e1, e2) = (norm(a, c), norm(b, d));
        if a == c || b == d || e1 == e2 || present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[oi]);
        present.insert(e1);
        present.insert(e2);
        edges[bi] = e1;
        edges[oi] = e2;
        is_bad[bi] = false;
        bad.pop();
    }
    edges.into_iter().zip(is_bad).filter(|(_, bad)| !bad).map(|(e, _)| e).collect()
}

/// One sparse Hermitian observable with `k` non-zeros in (almost) every row.
///
/// The diagonal entry of each row is present with probability `k/2^n`; the
/// remaining `k - 1` or `k` entries of the row sit off the diagonal, placed by
/// a random simple graph with those degrees so that the pattern is symmetric.
/// Values are drawn after the pattern: diagonal entries in row order, then
/// off-diagonal entries in `(row, col)` order.
pub fn gen_sparse_hermitian(n: usize, k: usize, mode: EntryMode, seed: RngSeed) -> Result<SparseHermitian> {
    LhmEnsembleSpec::new(1, k, n, mode).validate()?;
    let dim = 1usize << n;
    let mut rng = seed.rng();
    let p_diag = k as f64 / dim as f64;
    let diagonal: Vec<bool> = (0..dim).map(|_| rng.bernoulli(p_diag)).collect();
    let degrees: Vec<usize> = diagonal.iter().map(|&d| (k - usize::from(d)).min(dim - 1)).collect();
    let mut edges = random_graph(degrees, &mut rng);
    edges.sort_unstable();
    let mut upper: Vec<((usize, usize), Complex64)> = Vec::with_capacity(dim + edges.len());
    for (r, _) in diagonal.iter().enumerate().filter(|(_, d)| **d) {
        upper.push(((r, r), Complex64::new(rng.standard_normal(), 0.0)));
    }
    for e in edges {
        upper.push((e, random_entry(&mut rng, mode)));
    }
    Ok(SparseHermitian::from_upper(n, k, mode, Some(seed), upper))
}

/// Ensemble of `M` observables; observable `i` uses `seed.child(i)`.
pub fn gen_lhm_ensemble(spec: &LhmEnsembleSpec, seed: RngSeed) -> Result<Vec<SparseHermitian>> {
    spec.validate()?;
    (0..spec.observables)
        .map(|i| gen_sparse_hermitian(spec.qubits, spec.sparsity, spec.mode, seed.child(i as u64)))
        .collect()
}

/// Normalized state with i.i.d. complex Gaussian amplitudes.
pub fn gen_random_state(n: usize, seed: RngSeed) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidSpec("n must be at least 1".into()));
    }
    if n > MAX_STATE_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_STATE_QUBITS });
    }
    let mut rng = seed.rng();
    let mut amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| {
            let re = rng.standard_normal();
            Complex64::new(re, rng.standard_normal())
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::new(amps)
}
