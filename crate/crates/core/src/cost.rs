//! Closed-form resource counts for both methods and both observable
//! families, plus the norm estimates they rely on.
//!
//! All logarithms are natural.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::sparse::SparseHermitian;

/// Mean squared coefficient assumed when none is configured.
pub const DEFAULT_COEFF_MEAN_SQUARE: f64 = 0.25;
/// Coefficient scale for direct-measurement error splitting.
pub const DEFAULT_MU: f64 = 0.5;
/// Shot constant of the median-of-means shadow bound.
pub const SHADOW_CONSTANT: f64 = 34.0;

fn default_coeff_mean_square() -> f64 {
    DEFAULT_COEFF_MEAN_SQUARE
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg()))
    }
}

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    check(epsilon.is_finite() && epsilon > 0.0, || format!("epsilon must be positive, got {epsilon}"))?;
    check(delta > 0.0 && delta < 1.0, || format!("delta must lie in (0, 1), got {delta}"))
}

/// `M` observables, each a sum of `L` Pauli terms of weight `w` on `n` qubits.
///
/// Counts are reals so that scaling laws such as `L = log2 M` can be
/// evaluated without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcpProblem {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub w: f64,
    pub n: f64,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_coeff_mean_square")]
    pub coeff_mean_square: f64,
}

impl LcpProblem {
    pub fn new(m: f64, l: f64, w: f64, n: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self { m, l, w, n, epsilon, delta, coeff_mean_square: DEFAULT_COEFF_MEAN_SQUARE };
        p.validate()?;
        Ok(p)
    }

    pub fn with_coeff_mean_square(mut self, c2: f64) -> Result<Self> {
        self.coeff_mean_square = c2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.m.is_finite() && self.m >= 1.0, || format!("M must be at least 1, got {}", self.m))?;
        check(self.l.is_finite() && self.l >= 1.0, || format!("L must be at least 1, got {}", self.l))?;
        check(self.w.is_finite() && self.w >= 1.0, || format!("w must be at least 1, got {}", self.w))?;
        check(self.n.is_finite() && self.n >= self.w, || format!("n must be at least w, got n={} w={}", self.n, self.w))?;
        check(self.coeff_mean_square.is_finite() && self.coeff_mean_square > 0.0, || {
            format!("coeff_mean_square must be positive, got {}", self.coeff_mean_square)
        })?;
        check_eps_delta(self.epsilon, self.delta)
    }

    fn inputs(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// `M` sparse Hermitian observables with about `k` non-zeros per row on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhmProblem {
    #[serde(rename = "M")]
    pub m: f64,
    pub k: f64,
    pub n: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl LhmProblem {
    pub fn new(m: f64, k: f64, n: f64, epsilon: f64, delta: f64) -> Result<Self> {
        let p = Self { m, k, n, epsilon, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.m.is_finite() && self.m >= 1.0, || format!("M must be at least 1, got {}", self.m))?;
        check(self.n.is_finite() && self.n >= 1.0, || format!("n must be at least 1, got {}", self.n))?;
        check(self.k.is_finite() && self.k >= 1.0 && self.k <= self.n.exp2(), || {
            format!("k must lie in [1, 2^n], got k={} n={}", self.k, self.n)
        })?;
        check_eps_delta(self.epsilon, self.delta)
    }

    fn inputs(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Continuous formulas versus integer shot and group counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    #[default]
    Continuous,
    Ceiled,
}

impl CostMode {
    fn round(self, x: f64) -> f64 {
        match self {
            CostMode::Continuous => x,
            CostMode::Ceiled => x.ceil(),
        }
    }
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Continuous => "continuous",
            CostMode::Ceiled => "ceiled",
        })
    }
}

impl FromStr for CostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(CostMode::Continuous),
            "ceiled" => Ok(CostMode::Ceiled),
            other => Err(Error::Parse(format!("unknown cost mode '{other}'"))),
        }
    }
}

/// Measurements `T`, single-qubit gates `G` and classical FLOPs `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub mode: CostMode,
    #[serde(default)]
    pub inputs: Value,
}

impl CostReport {
    pub fn zero(mode: CostMode) -> Self {
        Self { t: 0.0, g: 0.0, c: 0.0, mode, inputs: Value::Null }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cost report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl Add for CostReport {
    type Output = CostReport;

    fn add(self, rhs: CostReport) -> CostReport {
        CostReport {
            t: self.t + rhs.t,
            g: self.g + rhs.g,
            c: self.c + rhs.c,
            mode: self.mode,
            inputs: json!([self.inputs, rhs.inputs]),
        }
    }
}

/// One line of a FLOP ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopItem {
    pub step: String,
    pub flops: f64,
}

/// Itemized FLOPs: `total = multiplier * sum(items)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopLedger {
    pub items: Vec<FlopItem>,
    pub multiplier: f64,
    pub total: f64,
}

impl FlopLedger {
    fn new(items: Vec<(&str, f64)>, multiplier: f64) -> Self {
        let items: Vec<FlopItem> = items.into_iter().map(|(s, f)| FlopItem { step: s.to_string(), flops: f }).collect();
        let total = multiplier * items.iter().map(|i| i.flops).sum::<f64>();
        Self { items, multiplier, total }
    }

    pub fn item(&self, step: &str) -> Option<f64> {
        self.items.iter().find(|i| i.step == step).map(|i| i.flops)
    }
}

/// `ln(2M/delta)`.
fn log_term(m: f64, delta: f64) -> f64 {
    (2.0 * m / delta).ln()
}

/// `c2 * L * 3^w`.
pub fn shadow_norm_lcp(l: f64, w: f64, coeff_mean_square: f64) -> f64 {
    coeff_mean_square * l * 3f64.powf(w)
}

/// Expected centered max absolute row sum of a random sparse observable,
/// `k sqrt(2/pi) + sqrt(k (1 - 2/pi)) sqrt(2 n ln 2)`.
pub fn infinity_norm_estimate(k: f64, n: f64) -> f64 {
    k * (2.0 / PI).sqrt() + (k * (1.0 - 2.0 / PI)).sqrt() * (2.0 * n * LN_2).sqrt()
}

/// `2 sqrt(2) sqrt(k)`.
pub fn spectral_norm_estimate(k: f64) -> f64 {
    2.0 * 2f64.sqrt() * k.sqrt()
}

/// `sqrt(||O||_1 ||O||_inf)`, which for Hermitian `O` is the max absolute row sum.
pub fn spectral_bound(o: &SparseHermitian) -> f64 {
    o.max_abs_row_sum()
}

/// Largest absolute eigenvalue by power iteration on `O^2`, starting from a
/// seeded Gaussian vector. Stops once successive estimates agree to `tol`
/// relative or after `max_iter` steps.
pub fn power_iteration_norm(o: &SparseHermitian, max_iter: usize, tol: f64, seed: RngSeed) -> f64 {
    let mut rng = seed.rng();
    let mut v: Vec<Complex64> = (0..o.dim()).map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal())).collect();
    let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        let ov = o.matvec(&v);
        let next = norm(&ov);
        v = o.matvec(&ov);
        let done = (next - estimate).abs() <= tol * next;
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Shadow cost for `M` LCP observables.
///
/// `T = 34 * c2 L 3^w * 2 ln(2M/delta) / eps^2` (with `c2 = 0.25` this is
/// `17 L 3^w ln(2M/delta) / eps^2`), `G = n T`, and `C` from
/// [`flop_breakdown_lcp`] with `K = 2 ln(2M/delta)`. Ceiled mode rounds `T`
/// and `K` up.
pub fn lcp_shadow_cost(p: &LcpProblem, mode: CostMode) -> Result<CostReport> {
    p.validate()?;
    let log = log_term(p.m, p.delta);
    let norm = shadow_norm_lcp(p.l, p.w, p.coeff_mean_square);
    let t = mode.round(SHADOW_CONSTANT * norm * 2.0 * log / (p.epsilon * p.epsilon));
    let k = mode.round(2.0 * log);
    let ledger = flop_breakdown_lcp(p, t, k, mode)?;
    Ok(CostReport { t, g: p.n * t, c: ledger.total, mode, inputs: p.inputs() })
}

/// Direct-measurement cost for `M` LCP observables with coefficient scale `mu`:
/// `T' = 2 mu^2 M L^3 ln(2ML/delta) / eps^2`, which is `0.5 M L^3 ...` at
/// `mu = 0.5`. Ceiled mode rounds the per-term count.
pub fn lcp_footage_cost(p: &LcpProblem, mu: f64, mode: CostMode) -> Result<CostReport> {
    p.validate()?;
    check(mu.is_finite() && mu > 0.0, || format!("mu must be positive, got {mu}"))?;
    let per_term = 2.0 * (p.l * mu).powi(2) / (p.epsilon * p.epsilon) * (2.0 * p.m * p.l / p.delta).ln();
    let t = p.m * p.l * mode.round(per_term);
    let mut inputs = p.inputs();
    inputs["mu"] = json!(mu);
    Ok(CostReport { t, g: 0.0, c: 0.0, mode, inputs })
}

/// Shadow cost for `M` sparse observables: `T = 34 nm^2 2 ln(2M/delta) / eps^2`
/// with `nm` the infinity-norm estimate, `G = n T`, `C` from
/// [`flop_breakdown_lhm`]. Ceiled mode rounds both the inner `2 ln` and `T`.
pub fn lhm_shadow_cost(p: &LhmProblem, mode: CostMode) -> Result<CostReport> {
    p.validate()?;
    let nm = infinity_norm_estimate(p.k, p.n);
    let groups = mode.round(2.0 * log_term(p.m, p.delta));
    let t = mode.round(SHADOW_CONSTANT * nm * nm * groups / (p.epsilon * p.epsilon));
    let ledger = flop_breakdown_lhm(p.n, p.k, p.m, t)?;
    Ok(CostReport { t, g: p.n * t, c: ledger.total, mode, inputs: p.inputs() })
}

/// Direct-measurement cost for `M` sparse observables:
/// `T' = M 16 k ln(2M/delta) / eps^2`. Ceiled mode rounds the per-observable count.
pub fn lhm_footage_cost(p: &LhmProblem, mode: CostMode) -> Result<CostReport> {
    p.validate()?;
    let per_obs = 16.0 * p.k * log_term(p.m, p.delta) / (p.epsilon * p.epsilon);
    Ok(CostReport { t: p.m * mode.round(per_obs), g: 0.0, c: 0.0, mode, inputs: p.inputs() })
}

/// Classical post-processing FLOPs for the LCP shadow estimator with `T`
/// shots and `K` median groups. Per term: matching over the expected
/// `T / 3^w` matched shots at `w + 1` FLOPs each, `K` for the median and 2
/// for the weighted sum; multiplied by `M L`.
///
/// Ceiled mode rounds the expected matched-shot count up.
pub fn flop_breakdown_lcp(p: &LcpProblem, t: f64, k: f64, mode: CostMode) -> Result<FlopLedger> {
    p.validate()?;
    check(t >= 0.0 && k >= 0.0, || "T and K must be non-negative".into())?;
    let matched = mode.round(t / 3f64.powf(p.w));
    Ok(FlopLedger::new(vec![("matching", matched * (p.w + 1.0)), ("median", k), ("weighted_sum", 2.0)], p.m * p.l))
}

/// Per-shot FLOPs for the LHM shadow estimator, multiplied by `T`: single-qubit
/// densities `24n`, `3 rho - I` at `8n`, Kronecker accumulation `8(4^n - 1)` and
/// the sparse trace `7 M 2^n k`.
pub fn flop_breakdown_lhm(n: f64, k: f64, m: f64, t: f64) -> Result<FlopLedger> {
    check(n >= 1.0 && k >= 1.0 && m >= 1.0 && t >= 0.0, || format!("invalid ledger inputs n={n} k={k} M={m} T={t}"))?;
    Ok(FlopLedger::new(
        vec![
            ("single_qubit_density", 24.0 * n),
            ("three_rho_minus_identity", 8.0 * n),
            ("kronecker", 8.0 * (4f64.powf(n) - 1.0)),
            ("expectation", 7.0 * m * n.exp2() * k),
        ],
        t,
    ))
}
