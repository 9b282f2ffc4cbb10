//! Wallclock estimates on hardware profiles, ratio heatmaps, runtime curves
//! under scaling laws, and break-even points between the two methods.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use evalexpr::{ContextWithMutableFunctions, ContextWithMutableVariables, Function, HashMapContext, Node, Value};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{
    lcp_footage_cost, lcp_shadow_cost, lhm_footage_cost, lhm_shadow_cost, CostMode, CostReport, LcpProblem, LhmProblem,
    DEFAULT_COEFF_MEAN_SQUARE, DEFAULT_MU,
};
use crate::error::{Error, Result};

/// Default precision and failure probability for frontier analysis.
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 0.01;
/// Largest `log2 M` accepted by curves and break-even scans.
pub const MAX_LOG2_M: f64 = 40.0;
/// Scan step for break-even detection, in `log2 M`.
pub const SCAN_STEP: f64 = 0.01;
/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-6;

/// Timing of one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareProfile {
    pub name: String,
    /// Seconds per measurement.
    pub t_meas: f64,
    /// Seconds per single-qubit gate.
    pub t_gate: f64,
    /// Classical FLOPs per second.
    pub classical_flops: f64,
}

impl HardwareProfile {
    pub fn new(name: &str, t_meas: f64, t_gate: f64, classical_flops: f64) -> Result<Self> {
        let p = Self { name: name.to_string(), t_meas, t_gate, classical_flops };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in [("t_meas", self.t_meas), ("t_gate", self.t_gate), ("classical_flops", self.classical_flops)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameters(format!("{label} of profile '{}' must be positive", self.name)));
            }
        }
        Ok(())
    }
}

pub fn builtin_profiles() -> Vec<HardwareProfile> {
    [
        ("superconducting", 1e-5, 1e-8),
        ("ion_trap", 1e-4, 1e-5),
        ("photonic", 1e-9, 1e-9),
        ("neutral_atom", 1e-5, 1e-6),
    ]
    .into_iter()
    .map(|(name, t_meas, t_gate)| HardwareProfile { name: name.to_string(), t_meas, t_gate, classical_flops: 1e15 })
    .collect()
}

/// Looks up a built-in profile; `-` and `_` are interchangeable.
pub fn builtin_profile(name: &str) -> Result<HardwareProfile> {
    let key = name.replace('-', "_");
    builtin_profiles()
        .into_iter()
        .find(|p| p.name == key)
        .ok_or_else(|| Error::InvalidParameters(format!("unknown hardware profile '{name}'")))
}

/// `T t_meas + G t_gate + C / flops`.
pub fn wallclock(report: &CostReport, profile: &HardwareProfile) -> f64 {
    report.t * profile.t_meas + report.g * profile.t_gate + report.c / profile.classical_flops
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Lcp,
    Lhm,
}

impl ProblemKind {
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            ProblemKind::Lcp => &["M", "L", "w", "n", "epsilon", "delta", "mu", "coeff_mean_square"],
            ProblemKind::Lhm => &["M", "k", "n", "epsilon", "delta"],
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcp" => Ok(ProblemKind::Lcp),
            "lhm" => Ok(ProblemKind::Lhm),
            other => Err(Error::Parse(format!("unknown problem family '{other}'"))),
        }
    }
}

/// Named parameter values. `log2M` may stand in for `M`.
pub type ParamSet = BTreeMap<String, f64>;

fn param(params: &ParamSet, name: &str, default: Option<f64>) -> Result<f64> {
    if name == "M" {
        if let Some(l) = params.get("log2M") {
            return Ok(l.exp2());
        }
    }
    params
        .get(name)
        .copied()
        .or(default)
        .ok_or_else(|| Error::InvalidSweep(format!("parameter '{name}' is not bound")))
}

/// Shadow and footage cost reports for one parameter point.
pub fn cost_pair(kind: ProblemKind, params: &ParamSet, mode: CostMode) -> Result<(CostReport, CostReport)> {
    for key in params.keys() {
        if key != "log2M" && !kind.parameters().contains(&key.as_str()) {
            return Err(Error::InvalidSweep(format!("'{key}' is not a parameter of the {kind:?} family")));
        }
    }
    let m = param(params, "M", None)?;
    let epsilon = param(params, "epsilon", Some(DEFAULT_EPSILON))?;
    let delta = param(params, "delta", Some(DEFAULT_DELTA))?;
    let n = param(params, "n", None)?;
    match kind {
        ProblemKind::Lcp => {
            let p = LcpProblem::new(m, param(params, "L", None)?, param(params, "w", None)?, n, epsilon, delta)?
                .with_coeff_mean_square(param(params, "coeff_mean_square", Some(DEFAULT_COEFF_MEAN_SQUARE))?)?;
            let mu = param(params, "mu", Some(DEFAULT_MU))?;
            Ok((lcp_shadow_cost(&p, mode)?, lcp_footage_cost(&p, mu, mode)?))
        }
        ProblemKind::Lhm => {
            let p = LhmProblem::new(m, param(params, "k", None)?, n, epsilon, delta)?;
            Ok((lhm_shadow_cost(&p, mode)?, lhm_footage_cost(&p, mode)?))
        }
    }
}

/// Shadow and footage wallclock seconds in continuous mode.
pub fn runtimes(kind: ProblemKind, params: &ParamSet, profile: &HardwareProfile) -> Result<(f64, f64)> {
    let (s, f) = cost_pair(kind, params, CostMode::Continuous)?;
    Ok((wallclock(&s, profile), wallclock(&f, profile)))
}

/// Evenly spaced values of one parameter, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn new(name: &str, min: f64, max: f64, steps: usize) -> Result<Self> {
        let a = Self { name: name.to_string(), min, max, steps };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::InvalidSweep(format!("axis '{}' needs finite min <= max", self.name)));
        }
        if self.steps == 0 || (self.steps == 1 && self.min != self.max) {
            return Err(Error::InvalidSweep(format!("axis '{}' needs at least 2 steps for a non-empty range", self.name)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 >= self.steps {
            return if i == 0 { self.min } else { self.max };
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

/// Ratio `t_shadow / t_footage` over two swept parameters, row-major in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierGrid {
    pub x: AxisSpec,
    pub y: AxisSpec,
    pub cells: Vec<f64>,
}

impl FrontierGrid {
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.y.steps + j]
    }

    /// CSV with header `x,y,ratio`. Values use shortest round-trip formatting
    /// so that parsing reproduces the grid exactly.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},ratio\n", self.x.name, self.y.name);
        for i in 0..self.x.steps {
            for j in 0..self.y.steps {
                let _ = writeln!(out, "{:?},{:?},{:?}", self.x.value(i), self.y.value(j), self.cell(i, j));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid".into()))?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        if names.len() != 3 || names[2] != "ratio" {
            return Err(Error::Parse(format!("bad grid header '{header}'")));
        }
        let mut rows = Vec::new();
        for line in lines {
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid row '{line}'"))))
                .collect::<Result<_>>()?;
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad grid row '{line}'")));
            }
            rows.push((f[0], f[1], f[2]));
        }
        let first_x = rows.first().ok_or_else(|| Error::Parse("grid has no rows".into()))?.0;
        let ny = rows.iter().take_while(|r| r.0 == first_x).count();
        if rows.len() % ny != 0 {
            return Err(Error::Parse("grid rows do not form a rectangle".into()));
        }
        let nx = rows.len() / ny;
        let x = AxisSpec::new(names[0], rows[0].0, rows[rows.len() - 1].0, nx)?;
        let y = AxisSpec::new(names[1], rows[0].1, rows[ny - 1].1, ny)?;
        for (idx, r) in rows.iter().enumerate() {
            if r.0 != x.value(idx / ny) || r.1 != y.value(idx % ny) {
                return Err(Error::Parse(format!("grid row {} is off the axis lattice", idx + 1)));
            }
        }
        Ok(Self { x, y, cells: rows.iter().map(|r| r.2).collect() })
    }
}

/// Continuous-mode ratio `t_shadow / t_footage` over two swept parameters
/// with the rest taken from `fixed`.
pub fn ratio_grid(
    kind: ProblemKind,
    fixed: &ParamSet,
    x: &AxisSpec,
    y: &AxisSpec,
    profile: &HardwareProfile,
) -> Result<FrontierGrid> {
    x.validate()?;
    y.validate()?;
    if x.name == y.name {
        return Err(Error::InvalidSweep(format!("both axes sweep '{}'", x.name)));
    }
    profile.validate()?;
    let cells = (0..x.steps * y.steps)
        .into_par_iter()
        .map(|idx| {
            let mut params = fixed.clone();
            params.insert(x.name.clone(), x.value(idx / y.steps));
            params.insert(y.name.clone(), y.value(idx % y.steps));
            let (s, f) = runtimes(kind, &params, profile)?;
            let r = s / f;
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidSweep(format!("non-positive ratio at {params:?}")));
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::InvalidParameters(m) => Error::InvalidSweep(m),
            other => other,
        })?;
    Ok(FrontierGrid { x: x.clone(), y: y.clone(), cells })
}

/// How problem parameters grow with `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingFamily {
    /// LCP with `L = n = log2 M` and `w = max(1, log2 log2 M)`.
    LcpFig2c,
    /// LHM with `n = k = log2 M`.
    LhmFig2d,
    /// Every parameter bound by an expression.
    Custom(ProblemKind),
}

impl ScalingFamily {
    pub fn kind(self) -> ProblemKind {
        match self {
            ScalingFamily::LcpFig2c => ProblemKind::Lcp,
            ScalingFamily::LhmFig2d => ProblemKind::Lhm,
            ScalingFamily::Custom(k) => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingFamily::LcpFig2c => "lcp_fig2c",
            ScalingFamily::LhmFig2d => "lhm_fig2d",
            ScalingFamily::Custom(ProblemKind::Lcp) => "custom_lcp",
            ScalingFamily::Custom(ProblemKind::Lhm) => "custom_lhm",
        }
    }
}

impl FromStr for ScalingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcp_fig2c" => Ok(ScalingFamily::LcpFig2c),
            "lhm_fig2d" => Ok(ScalingFamily::LhmFig2d),
            "custom_lcp" => Ok(ScalingFamily::Custom(ProblemKind::Lcp)),
            "custom_lhm" => Ok(ScalingFamily::Custom(ProblemKind::Lhm)),
            other => Err(Error::Parse(format!("unknown scaling family '{other}'"))),
        }
    }
}

/// A scaling family plus expression bindings evaluated per point.
///
/// Expressions see the variables `M` and `log2M` and the functions `log2`,
/// `ln`, `sqrt`, `exp2`, `floor`, `ceil`, `min` and `max`. Integer literals
/// follow integer arithmetic, so write `0.5` rather than `1/2`. Bindings
/// override the family's built-in laws; `epsilon` and `delta` default to 0.01.
#[derive(Debug, Clone)]
pub struct ScalingAssumption {
    family: ScalingFamily,
    bindings: BTreeMap<String, String>,
    compiled: Vec<(String, Node)>,
}

impl ScalingAssumption {
    pub fn new(family: ScalingFamily, bindings: BTreeMap<String, String>) -> Result<Self> {
        let kind = family.kind();
        let mut compiled = Vec::new();
        for (name, expr) in &bindings {
            if name == "M" || !kind.parameters().contains(&name.as_str()) {
                return Err(Error::InvalidParameters(format!("cannot bind '{name}' for the {kind:?} family")));
            }
            let node = evalexpr::build_operator_tree(expr)
                .map_err(|e| Error::Parse(format!("binding {name} = '{expr}': {e}")))?;
            compiled.push((name.clone(), node));
        }
        if let ScalingFamily::Custom(_) = family {
            let required: &[&str] = match kind {
                ProblemKind::Lcp => &["L", "w", "n"],
                ProblemKind::Lhm => &["k", "n"],
            };
            if let Some(missing) = required.iter().find(|r| !bindings.contains_key(**r)) {
                return Err(Error::InvalidParameters(format!("custom scaling must bind '{missing}'")));
            }
        }
        Ok(Self { family, bindings, compiled })
    }

    pub fn lcp_fig2c() -> Self {
        Self::new(ScalingFamily::LcpFig2c, BTreeMap::new()).expect("built-in scaling")
    }

    pub fn lhm_fig2d() -> Self {
        Self::new(ScalingFamily::LhmFig2d, BTreeMap::new()).expect("built-in scaling")
    }

    pub fn family(&self) -> ScalingFamily {
        self.family
    }

    pub fn bindings(&self) -> &BTreeMap<String, String> {
        &self.bindings
    }

    /// Parameter values at `log2 M = x`.
    pub fn params(&self, x: f64) -> Result<ParamSet> {
        let mut p = ParamSet::new();
        p.insert("M".into(), x.exp2());
        match self.family {
            ScalingFamily::LcpFig2c => {
                p.insert("L".into(), x);
                p.insert("n".into(), x);
                p.insert("w".into(), x.log2().max(1.0));
            }
            ScalingFamily::LhmFig2d => {
                p.insert("n".into(), x);
                p.insert("k".into(), x);
            }
            ScalingFamily::Custom(_) => {}
        }
        if !self.compiled.is_empty() {
            let ctx = expression_context(x)?;
            for (name, node) in &self.compiled {
                let v = node
                    .eval_number_with_context(&ctx)
                    .map_err(|e| Error::InvalidParameters(format!("evaluating '{name}' at log2M={x}: {e}")))?;
                p.insert(name.clone(), v);
            }
        }
        Ok(p)
    }
}

fn expression_context(log2m: f64) -> Result<HashMapContext> {
    let mut ctx = HashMapContext::new();
    let err = |e: evalexpr::EvalexprError| Error::InvalidParameters(e.to_string());
    ctx.set_value("M".into(), Value::Float(log2m.exp2())).map_err(err)?;
    ctx.set_value("log2M".into(), Value::Float(log2m)).map_err(err)?;
    let unary: [(&str, fn(f64) -> f64); 4] = [("log2", f64::log2), ("ln", f64::ln), ("sqrt", f64::sqrt), ("exp2", f64::exp2)];
    for (name, f) in unary {
        ctx.set_function(name.into(), Function::new(move |a: &Value| Ok(Value::Float(f(a.as_number()?)))))
            .map_err(err)?;
    }
    Ok(ctx)
}

/// `log2 M` range for curves and break-even scans.
pub fn check_range(min: f64, max: f64) -> Result<()> {
    if !(min >= 1.0 && max <= MAX_LOG2_M && min < max) {
        return Err(Error::InvalidRange(format!("log2M range [{min}, {max}] must satisfy 1 <= min < max <= {MAX_LOG2_M}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub log2m: f64,
    pub t_shadow: f64,
    pub t_footage: f64,
}

/// Shadow and footage wallclock at `steps` evenly spaced `log2 M` values.
pub fn runtime_curves(
    assumption: &ScalingAssumption,
    profile: &HardwareProfile,
    min: f64,
    max: f64,
    steps: usize,
) -> Result<Vec<CurvePoint>> {
    check_range(min, max)?;
    let axis = AxisSpec::new("log2M", min, max, steps.max(2))?;
    (0..axis.steps)
        .into_par_iter()
        .map(|i| point(assumption, profile, axis.value(i)))
        .collect()
}

fn point(assumption: &ScalingAssumption, profile: &HardwareProfile, x: f64) -> Result<CurvePoint> {
    let (t_shadow, t_footage) = runtimes(assumption.family.kind(), &assumption.params(x)?, profile)?;
    Ok(CurvePoint { log2m: x, t_shadow, t_footage })
}

/// Nine significant digits.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn curves_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("log2M,t_shadow_s,t_footage_s\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", format_sig9(p.log2m), format_sig9(p.t_shadow), format_sig9(p.t_footage));
    }
    out
}

pub fn curves_from_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "log2M,t_shadow_s,t_footage_s" => {}
        other => return Err(Error::Parse(format!("bad curve header {other:?}"))),
    }
    lines
        .map(|line| {
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad curve row '{line}'"))))
                .collect::<Result<_>>()?;
            match f[..] {
                [log2m, t_shadow, t_footage] => Ok(CurvePoint { log2m, t_shadow, t_footage }),
                _ => Err(Error::Parse(format!("bad curve row '{line}'"))),
            }
        })
        .collect()
}

/// `ln(t_shadow / t_footage)`; its zeros are the break-even points.
fn log_gap(assumption: &ScalingAssumption, profile: &HardwareProfile, x: f64) -> Result<f64> {
    let p = point(assumption, profile, x)?;
    Ok((p.t_shadow / p.t_footage).ln())
}

/// All sign changes of `t_shadow - t_footage` over `log2 M` in `[min, max]`.
/// The range is scanned at steps of at most 0.01 and each bracketed change is
/// bisected to a width below 1e-6.
pub fn break_even(assumption: &ScalingAssumption, profile: &HardwareProfile, min: f64, max: f64) -> Result<Vec<f64>> {
    check_range(min, max)?;
    let intervals = ((max - min) / SCAN_STEP).ceil() as usize;
    let axis = AxisSpec::new("log2M", min, max, intervals + 1)?;
    let gaps: Vec<f64> = (0..axis.steps)
        .into_par_iter()
        .map(|i| log_gap(assumption, profile, axis.value(i)))
        .collect::<Result<_>>()?;
    let mut crossings = Vec::new();
    for i in 0..intervals {
        let (ga, gb) = (gaps[i], gaps[i + 1]);
        if ga == 0.0 {
            crossings.push(axis.value(i));
            continue;
        }
        if ga * gb >= 0.0 {
            continue;
        }
        let (mut a, mut b) = (axis.value(i), axis.value(i + 1));
        let mut fa = ga;
        while b - a > BISECTION_WIDTH {
            let mid = 0.5 * (a + b);
            let fm = log_gap(assumption, profile, mid)?;
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        crossings.push(0.5 * (a + b));
    }
    if gaps[intervals] == 0.0 {
        crossings.push(max);
    }
    Ok(crossings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenReport {
    pub family: String,
    pub profile: String,
    #[serde(rename = "crossings_log2M")]
    pub crossings_log2m: Vec<f64>,
}

impl BreakEvenReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("break-even report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc() -> HardwareProfile {
        builtin_profile("superconducting").unwrap()
    }

    fn params(pairs: &[(&str, f64)]) -> ParamSet {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn builtin_profile_values() {
        let p = builtin_profiles();
        assert_eq!(p.len(), 4);
        assert_eq!(sc().t_meas, 1e-5);
        assert_eq!(builtin_profile("photonic").unwrap().t_gate, 1e-9);
        assert_eq!(builtin_profile("ion-trap").unwrap().t_meas, 1e-4);
        assert_eq!(builtin_profile("neutral_atom").unwrap().t_gate, 1e-6);
        assert!(p.iter().all(|p| p.classical_flops == 1e15));
        assert!(builtin_profile("abacus").is_err());
    }

    #[test]
    fn wallclock_examples() {
        let r = CostReport { t: 1e6, g: 1e7, c: 1e12, mode: CostMode::Continuous, inputs: serde_json::Value::Null };
        assert!((wallclock(&r, &sc()) - 10.101).abs() < 1e-12);
        assert_eq!(wallclock(&CostReport::zero(CostMode::Continuous), &sc()), 0.0);
        let f = CostReport { t: 1234.0, g: 0.0, c: 0.0, mode: CostMode::Continuous, inputs: serde_json::Value::Null };
        assert_eq!(wallclock(&f, &sc()), 1234.0 * 1e-5);
        let sum = r.clone() + f.clone();
        assert!((wallclock(&sum, &sc()) - wallclock(&r, &sc()) - wallclock(&f, &sc())).abs() < 1e-12);
    }

    #[test]
    fn grid_properties() {
        let fixed = params(&[("L", 4.0), ("n", 10.0)]);
        let x = AxisSpec::new("log2M", 1.0, 20.0, 20).unwrap();
        let y = AxisSpec::new("w", 1.0, 6.0, 6).unwrap();
        let g = ratio_grid(ProblemKind::Lcp, &fixed, &x, &y, &sc()).unwrap();
        assert_eq!(g.cells.len(), 120);
        for i in 0..20 {
            for j in 1..6 {
                assert!(g.cell(i, j) > g.cell(i, j - 1));
            }
        }
        let t = ratio_grid(ProblemKind::Lcp, &fixed, &y, &x, &sc()).unwrap();
        for i in 0..20 {
            for j in 0..6 {
                assert_eq!(g.cell(i, j), t.cell(j, i));
            }
        }
        assert_eq!(FrontierGrid::from_csv(&g.to_csv()).unwrap(), g);
        assert!(ratio_grid(ProblemKind::Lcp, &fixed, &x, &x, &sc()).is_err());
        assert!(ratio_grid(ProblemKind::Lhm, &fixed, &x, &y, &sc()).is_err());
    }

    #[test]
    fn grid_epsilon_invariance_at_moderate_m() {
        let x = AxisSpec::new("log2M", 1.0, 10.0, 10).unwrap();
        let base = |e: f64| {
            let lcp = ratio_grid(
                ProblemKind::Lcp,
                &params(&[("L", 4.0), ("n", 10.0), ("epsilon", e)]),
                &x,
                &AxisSpec::new("w", 1.0, 6.0, 6).unwrap(),
                &sc(),
            )
            .unwrap();
            let lhm = ratio_grid(
                ProblemKind::Lhm,
                &params(&[("n", 12.0), ("epsilon", e)]),
                &x,
                &AxisSpec::new("k", 1.0, 32.0, 32).unwrap(),
                &sc(),
            )
            .unwrap();
            (lcp, lhm)
        };
        let (a, b) = base(0.01);
        let (c, d) = base(0.1);
        for (u, v) in a.cells.iter().zip(&c.cells).chain(b.cells.iter().zip(&d.cells)) {
            assert!((u / v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reciprocal_ratio() {
        let p = params(&[("M", 100.0), ("k", 8.0), ("n", 10.0)]);
        let (s, f) = runtimes(ProblemKind::Lhm, &p, &sc()).unwrap();
        assert!(((s / f) * (f / s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fig2c_crossover() {
        let c = break_even(&ScalingAssumption::lcp_fig2c(), &sc(), 2.0, 34.0).unwrap();
        assert_eq!(c.len(), 1, "{c:?}");
        assert!((3.0..=5.0).contains(&c[0]));
    }

    #[test]
    fn photonic_lhm_never_crosses() {
        let p = builtin_profile("photonic").unwrap();
        assert!(break_even(&ScalingAssumption::lhm_fig2d(), &p, 2.0, 34.0).unwrap().is_empty());
        let curves = runtime_curves(&ScalingAssumption::lhm_fig2d(), &p, 2.0, 34.0, 100).unwrap();
        assert!(curves.iter().all(|c| c.t_shadow > c.t_footage));
    }

    #[test]
    fn crossings_bracket_sign_changes() {
        let a = ScalingAssumption::lhm_fig2d();
        for x in break_even(&a, &sc(), 2.0, 34.0).unwrap() {
            let lo = log_gap(&a, &sc(), x - 5e-4).unwrap();
            let hi = log_gap(&a, &sc(), x + 5e-4).unwrap();
            assert!(lo * hi < 0.0);
        }
    }

    #[test]
    fn custom_scaling_reproduces_builtin() {
        let bindings: BTreeMap<String, String> = [("L", "log2M"), ("n", "log2M"), ("w", "max(1.0, log2(log2M))")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let custom = ScalingAssumption::new(ScalingFamily::Custom(ProblemKind::Lcp), bindings).unwrap();
        let builtin = ScalingAssumption::lcp_fig2c();
        for x in [2.0, 4.5, 17.0] {
            assert_eq!(custom.params(x).unwrap(), builtin.params(x).unwrap());
        }
        assert!(ScalingAssumption::new(ScalingFamily::Custom(ProblemKind::Lhm), BTreeMap::new()).is_err());
        let bad = [("q".to_string(), "1".to_string())].into_iter().collect();
        assert!(ScalingAssumption::new(ScalingFamily::LcpFig2c, bad).is_err());
    }

    #[test]
    fn curves_csv_round_trip() {
        let pts = runtime_curves(&ScalingAssumption::lcp_fig2c(), &sc(), 2.0, 10.0, 9).unwrap();
        let csv = curves_to_csv(&pts);
        assert!(csv.starts_with("log2M,t_shadow_s,t_footage_s\n"));
        let back = curves_from_csv(&csv).unwrap();
        assert_eq!(curves_to_csv(&back), csv);
        for w in pts.windows(2) {
            assert!(w[1].log2m > w[0].log2m);
        }
        assert!(runtime_curves(&ScalingAssumption::lcp_fig2c(), &sc(), 0.5, 10.0, 9).is_err());
        assert!(runtime_curves(&ScalingAssumption::lcp_fig2c(), &sc(), 2.0, 41.0, 9).is_err());
    }

    #[test]
    fn break_even_json() {
        let r = BreakEvenReport { family: "lhm_fig2d".into(), profile: "photonic".into(), crossings_log2m: vec![] };
        assert_eq!(r.to_json(), r#"{"family":"lhm_fig2d","profile":"photonic","crossings_log2M":[]}"#);
        assert_eq!(BreakEvenReport::from_json(&r.to_json()).unwrap(), r);
    }
}
