use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use shadow_frontier::cost::{
    infinity_norm_estimate, lcp_footage_cost, lcp_shadow_cost, lhm_footage_cost, lhm_shadow_cost, power_iteration_norm,
    spectral_bound, spectral_norm_estimate, CostMode, LcpProblem, LhmProblem, DEFAULT_COEFF_MEAN_SQUARE, DEFAULT_MU,
};
use shadow_frontier::ensemble::{
    gen_lcp_ensemble, gen_lhm_ensemble, gen_random_state, gen_sparse_hermitian, LcpEnsembleSpec, LhmEnsembleSpec,
};
use shadow_frontier::footage::{allocate_lcp, allocate_lhm, measure_footage_lcp, FootageAllocation, Spectrum};
use shadow_frontier::frontier::{
    break_even, builtin_profiles, curves_to_csv, format_sig9, ratio_grid, runtime_curves, AxisSpec, BreakEvenReport,
    HardwareProfile, ParamSet, ProblemKind, ScalingAssumption, ScalingFamily, DEFAULT_DELTA, DEFAULT_EPSILON,
};
use shadow_frontier::pauli::{decompose_hermitian, reconstruct, LcpObservable, DEFAULT_TOLERANCE};
use shadow_frontier::shadow::{acquire_shadows, estimate_lcp, estimate_lhm, EstimatorConfig};
use shadow_frontier::sparse::{EntryMode, TripletMatrix};
use shadow_frontier::state::expectation_exact;
use shadow_frontier::RngSeed;

use crate::args::{
    Command, ConfigFile, CostCommand, CurveArgs, DecomposeArgs, FrontierCommand, GridArgs, LcpCostArgs, LhmCostArgs,
    Method, NormArgs, NormKind, ProfileArgs, SimArgs, SimulateCommand,
};
use crate::{CliError, Output};

pub struct Context {
    pub seed: RngSeed,
    pub config: ConfigFile,
}

type Res<T> = Result<T, CliError>;

fn require<T>(value: Option<T>, flag: &str) -> Res<T> {
    value.ok_or_else(|| CliError::usage(format!("missing --{flag}")))
}

fn flag_err(flag: &str) -> impl Fn(shadow_frontier::Error) -> CliError + '_ {
    move |e| {
        let mut c = CliError::from(e);
        c.message = format!("--{flag}: {}", c.message);
        c
    }
}

pub fn dispatch(command: Command, ctx: &Context) -> Res<Output> {
    let cfg = &ctx.config;
    match command {
        Command::Cost(CostCommand::Lcp(mut a)) => {
            a.fill_from(cfg.cost.as_ref().and_then(|c| c.lcp.as_ref()));
            cost_lcp(a)
        }
        Command::Cost(CostCommand::Lhm(mut a)) => {
            a.fill_from(cfg.cost.as_ref().and_then(|c| c.lhm.as_ref()));
            cost_lhm(a)
        }
        Command::Simulate(cmd) => {
            let sim = cfg.simulate.as_ref();
            match cmd {
                SimulateCommand::ShadowLcp(mut a) => {
                    a.fill_from(sim.and_then(|s| s.shadow_lcp.as_ref()));
                    simulate_shadow_lcp(a, ctx.seed)
                }
                SimulateCommand::ShadowLhm(mut a) => {
                    a.fill_from(sim.and_then(|s| s.shadow_lhm.as_ref()));
                    simulate_shadow_lhm(a, ctx.seed)
                }
                SimulateCommand::FootageLcp(mut a) => {
                    a.fill_from(sim.and_then(|s| s.footage_lcp.as_ref()));
                    simulate_footage_lcp(a, ctx.seed)
                }
                SimulateCommand::FootageLhm(mut a) => {
                    a.fill_from(sim.and_then(|s| s.footage_lhm.as_ref()));
                    simulate_footage_lhm(a, ctx.seed)
                }
            }
        }
        Command::Frontier(cmd) => {
            let fr = cfg.frontier.as_ref();
            match cmd {
                FrontierCommand::Grid(mut a) => {
                    a.fill_from(fr.and_then(|f| f.grid.as_ref()));
                    frontier_grid(a, cfg)
                }
                FrontierCommand::Curves(mut a) => {
                    a.fill_from(fr.and_then(|f| f.curves.as_ref()));
                    frontier_curves(a, cfg)
                }
                FrontierCommand::Breakeven(mut a) => {
                    a.fill_from(fr.and_then(|f| f.breakeven.as_ref()));
                    frontier_breakeven(a, cfg)
                }
            }
        }
        Command::Decompose(mut a) => {
            a.fill_from(cfg.decompose.as_ref());
            decompose(a)
        }
        Command::ValidateNorms(mut a) => {
            a.fill_from(cfg.validate_norms.as_ref());
            validate_norms(a, ctx.seed)
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Shadow => "shadow",
        Method::Footage => "footage",
    }
}

fn cost_lcp(a: LcpCostArgs) -> Res<Output> {
    let w = require(a.w, "w")?;
    let p = LcpProblem::new(
        require(a.m, "M")?,
        require(a.l, "L")?,
        w,
        a.n.unwrap_or(w),
        require(a.eps, "eps")?,
        require(a.delta, "delta")?,
    )
    .map_err(flag_err("M/L/w/n/eps/delta"))?
    .with_coeff_mean_square(a.coeff_mean_square.unwrap_or(DEFAULT_COEFF_MEAN_SQUARE))
    .map_err(flag_err("coeff-mean-square"))?;
    let mode = a.mode.unwrap_or_default();
    let method = a.method.unwrap_or(Method::Shadow);
    let report = match method {
        Method::Shadow => lcp_shadow_cost(&p, mode)?,
        Method::Footage => lcp_footage_cost(&p, a.mu.unwrap_or(DEFAULT_MU), mode).map_err(flag_err("mu"))?,
    };
    Ok(Output {
        summary: format!(
            "lcp {} ({mode}): T={} G={} C={}",
            method_name(method),
            format_sig9(report.t),
            format_sig9(report.g),
            format_sig9(report.c)
        ),
        body: report.to_json() + "\n",
    })
}

fn cost_lhm(a: LhmCostArgs) -> Res<Output> {
    let p = LhmProblem::new(
        require(a.m, "M")?,
        require(a.k, "k")?,
        require(a.n, "n")?,
        require(a.eps, "eps")?,
        require(a.delta, "delta")?,
    )
    .map_err(flag_err("M/k/n/eps/delta"))?;
    let mode = a.mode.unwrap_or_default();
    let method = a.method.unwrap_or(Method::Shadow);
    let report = match method {
        Method::Shadow => lhm_shadow_cost(&p, mode)?,
        Method::Footage => lhm_footage_cost(&p, mode)?,
    };
    Ok(Output {
        summary: format!(
            "lhm {} ({mode}): T={} G={} C={}",
            method_name(method),
            format_sig9(report.t),
            format_sig9(report.g),
            format_sig9(report.c)
        ),
        body: report.to_json() + "\n",
    })
}

struct Budget {
    eps: f64,
    delta: f64,
    trials: u64,
}

fn budget(a: &SimArgs) -> Res<Budget> {
    let b = Budget {
        eps: a.eps.unwrap_or(DEFAULT_EPSILON),
        delta: a.delta.unwrap_or(DEFAULT_DELTA),
        trials: a.trials.unwrap_or(100),
    };
    if !(b.eps > 0.0 && b.eps.is_finite()) {
        return Err(CliError::usage("--eps must be positive"));
    }
    if !(b.delta > 0.0 && b.delta < 1.0) {
        return Err(CliError::usage("--delta must lie in (0, 1)"));
    }
    if b.trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    Ok(b)
}

fn check_qubits(n: usize, max: usize) -> Res<()> {
    if n == 0 || n > max {
        return Err(CliError::usage(format!("--n must lie in 1..={max}, got {n}")));
    }
    Ok(())
}

/// Runs `trials` independent trials; trial `t` uses `seed.child(t)`.
fn trial_table<F>(seed: RngSeed, b: &Budget, trailer: String, f: F) -> Res<Output>
where
    F: Fn(RngSeed) -> Res<f64> + Sync,
{
    let errors: Vec<(RngSeed, f64)> = (0..b.trials)
        .into_par_iter()
        .map(|t| {
            let s = seed.child(t);
            f(s).map(|e| (s, e))
        })
        .collect::<Res<_>>()?;
    let mut body = String::from("trial,seed,max_abs_error,success\n");
    let mut failures = 0u64;
    for (t, (s, err)) in errors.iter().enumerate() {
        let ok = *err <= b.eps;
        failures += u64::from(!ok);
        let _ = writeln!(body, "{t},{s},{},{ok}", format_sig9(*err));
    }
    let rate = failures as f64 / b.trials as f64;
    let _ = writeln!(body, "# trials={} failures={failures} failure_rate={} {trailer}", b.trials, format_sig9(rate));
    Ok(Output {
        body,
        summary: format!("{} trials, {failures} failures, failure rate {rate} (delta {})", b.trials, b.delta),
    })
}

fn max_error(estimates: &[f64], exact: &[f64]) -> f64 {
    estimates.iter().zip(exact).map(|(e, x)| (e - x).abs()).fold(0.0, f64::max)
}

fn lcp_spec(a: &SimArgs) -> Res<LcpEnsembleSpec> {
    let n = require(a.n, "n")?;
    let spec = LcpEnsembleSpec::new(require(a.m, "M")?, require(a.l, "L")?, require(a.w, "w")?, n);
    spec.validate().map_err(flag_err("M/L/w"))?;
    Ok(spec)
}

fn lhm_spec(a: &SimArgs) -> Res<LhmEnsembleSpec> {
    let spec =
        LhmEnsembleSpec::new(require(a.m, "M")?, require(a.k, "k")?, require(a.n, "n")?, a.entries.unwrap_or_default());
    spec.validate().map_err(flag_err("M/k/n"))?;
    Ok(spec)
}

fn estimator_config(a: &SimArgs, m: usize, delta: f64, shots: usize) -> Res<EstimatorConfig> {
    let groups = a.groups.unwrap_or_else(|| EstimatorConfig::default_groups(m, delta));
    if groups == 0 || groups > shots {
        return Err(CliError::usage(format!("--groups must lie in 1..={shots}")));
    }
    Ok(EstimatorConfig::new(groups, a.convention.unwrap_or_default()))
}

fn simulate_shadow_lcp(a: SimArgs, seed: RngSeed) -> Res<Output> {
    let b = budget(&a)?;
    let spec = lcp_spec(&a)?;
    check_qubits(spec.qubits, 14)?;
    let shots = match a.shots {
        Some(s) => s,
        None => {
            let p = LcpProblem::new(
                spec.observables as f64,
                spec.terms as f64,
                spec.weight as f64,
                spec.qubits as f64,
                b.eps,
                b.delta,
            )?;
            lcp_shadow_cost(&p, CostMode::Ceiled)?.t as usize
        }
    };
    let config = estimator_config(&a, spec.observables, b.delta, shots)?;
    let trailer = format!("shots={shots} groups={}", config.groups);
    trial_table(seed, &b, trailer, |s| {
        let state = gen_random_state(spec.qubits, s.child(0))?;
        let obs = gen_lcp_ensemble(&spec, s.child(1))?;
        let shadows = acquire_shadows(&state, shots, s.child(2))?;
        let est = estimate_lcp(&shadows, &obs, &config)?;
        let exact: Vec<f64> = obs.iter().map(|o| expectation_exact(&state, o)).collect::<Result<_, _>>()?;
        Ok(max_error(&est, &exact))
    })
}

fn simulate_shadow_lhm(a: SimArgs, seed: RngSeed) -> Res<Output> {
    let b = budget(&a)?;
    let spec = lhm_spec(&a)?;
    check_qubits(spec.qubits, 12)?;
    let shots = match a.shots {
        Some(s) => s,
        None => {
            let p =
                LhmProblem::new(spec.observables as f64, spec.sparsity as f64, spec.qubits as f64, b.eps, b.delta)?;
            lhm_shadow_cost(&p, CostMode::Ceiled)?.t as usize
        }
    };
    let config = estimator_config(&a, spec.observables, b.delta, shots)?;
    let trailer = format!("shots={shots} groups={}", config.groups);
    trial_table(seed, &b, trailer, |s| {
        let state = gen_random_state(spec.qubits, s.child(0))?;
        let obs = gen_lhm_ensemble(&spec, s.child(1))?;
        let shadows = acquire_shadows(&state, shots, s.child(2))?;
        let est = estimate_lhm(&shadows, &obs, &config)?;
        let exact: Vec<f64> = obs.iter().map(|o| expectation_exact(&state, o)).collect::<Result<_, _>>()?;
        Ok(max_error(&est, &exact))
    })
}

fn simulate_footage_lcp(a: SimArgs, seed: RngSeed) -> Res<Output> {
    let b = budget(&a)?;
    let spec = lcp_spec(&a)?;
    check_qubits(spec.qubits, 14)?;
    let mut alloc = allocate_lcp(spec.observables, spec.terms, b.eps, b.delta, a.mu.unwrap_or(DEFAULT_MU))
        .map_err(flag_err("mu"))?;
    if let Some(s) = a.shots {
        if s == 0 {
            return Err(CliError::usage("--shots must be at least 1"));
        }
        alloc = FootageAllocation { shots: s, ..alloc };
    }
    let trailer = format!("shots_per_term={}", alloc.shots);
    trial_table(seed, &b, trailer, |s| {
        let state = gen_random_state(spec.qubits, s.child(0))?;
        let obs: Vec<LcpObservable> = gen_lcp_ensemble(&spec, s.child(1))?;
        let est = measure_footage_lcp(&state, &obs, &alloc, s.child(2))?;
        let exact: Vec<f64> = obs.iter().map(|o| expectation_exact(&state, o)).collect::<Result<_, _>>()?;
        Ok(max_error(&est, &exact))
    })
}

fn simulate_footage_lhm(a: SimArgs, seed: RngSeed) -> Res<Output> {
    let b = budget(&a)?;
    let spec = lhm_spec(&a)?;
    check_qubits(spec.qubits, 10)?;
    if a.shots == Some(0) {
        return Err(CliError::usage("--shots must be at least 1"));
    }
    let trailer = match a.shots {
        Some(s) => format!("shots_per_observable={s}"),
        None => "shots_per_observable=hoeffding(spectral_bound)".to_string(),
    };
    trial_table(seed, &b, trailer, |s| {
        let state = gen_random_state(spec.qubits, s.child(0))?;
        let obs = gen_lhm_ensemble(&spec, s.child(1))?;
        let mut worst = 0.0f64;
        for (j, o) in obs.iter().enumerate() {
            let shots = match a.shots {
                Some(n) => n,
                None => allocate_lhm(spec.observables, b.eps, b.delta, spectral_bound(o))?.shots,
            };
            let spectrum = Spectrum::new(&state, o)?;
            let est = spectrum.sample_mean(shots, s.child(2).child(j as u64))?;
            worst = worst.max((est - spectrum.mean()).abs());
        }
        Ok(worst)
    })
}

fn known_profiles(cfg: &ConfigFile) -> Res<Vec<HardwareProfile>> {
    let mut profiles = builtin_profiles();
    for extra in cfg.profiles.iter().flatten() {
        extra.validate()?;
        match profiles.iter_mut().find(|p| p.name == extra.name) {
            Some(p) => *p = extra.clone(),
            None => profiles.push(extra.clone()),
        }
    }
    Ok(profiles)
}

fn select_profiles(a: &ProfileArgs, cfg: &ConfigFile) -> Res<Vec<HardwareProfile>> {
    let known = known_profiles(cfg)?;
    if a.all_profiles {
        return Ok(known);
    }
    let name = a.profile.clone().unwrap_or_else(|| "superconducting".into()).replace('-', "_");
    known
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| vec![p])
        .ok_or_else(|| CliError::usage(format!("--profile: unknown hardware profile '{name}'")))
}

/// Joins per-profile blocks, labelling each when there is more than one.
fn join_blocks(blocks: Vec<(String, String)>) -> String {
    if blocks.len() == 1 {
        return blocks.into_iter().next().map(|b| b.1).unwrap_or_default();
    }
    blocks.into_iter().map(|(name, body)| format!("# profile={name}\n{body}")).collect()
}

fn parse_axis(spec: &str, flag: &str) -> Res<AxisSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::usage(format!("--{flag}: expected name:min:max:steps, got '{spec}'"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let min = parts[1].parse().map_err(|_| bad())?;
    let max = parts[2].parse().map_err(|_| bad())?;
    let steps = parts[3].parse().map_err(|_| bad())?;
    AxisSpec::new(parts[0], min, max, steps).map_err(flag_err(flag))
}

fn split_assignment<'a>(s: &'a str, flag: &str) -> Res<(&'a str, &'a str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| CliError::usage(format!("--{flag}: expected name=value, got '{s}'")))
}

fn frontier_grid(a: GridArgs, cfg: &ConfigFile) -> Res<Output> {
    let kind: ProblemKind = require(a.family.as_deref(), "family")?.parse().map_err(flag_err("family"))?;
    let x = parse_axis(&require(a.x, "x")?, "x")?;
    let y = parse_axis(&require(a.y, "y")?, "y")?;
    let mut fixed = ParamSet::new();
    for s in a.set.iter().flatten() {
        let (k, v) = split_assignment(s, "set")?;
        let v: f64 = v.parse().map_err(|_| CliError::usage(format!("--set: '{s}' is not numeric")))?;
        fixed.insert(k.to_string(), v);
    }
    let mut blocks = Vec::new();
    let mut summary = Vec::new();
    for p in select_profiles(&a.profile, cfg)? {
        let grid = ratio_grid(kind, &fixed, &x, &y, &p)?;
        let below = grid.cells.iter().filter(|r| **r <= 1.0).count();
        summary.push(format!("{}: {below}/{} cells favour shadows", p.name, grid.cells.len()));
        blocks.push((p.name.clone(), grid.to_csv()));
    }
    Ok(Output { body: join_blocks(blocks), summary: summary.join("; ") })
}

fn assumption(a: &CurveArgs) -> Res<ScalingAssumption> {
    let family: ScalingFamily = require(a.family.as_deref(), "family")?.parse().map_err(flag_err("family"))?;
    let mut bindings = BTreeMap::new();
    for b in a.bind.iter().flatten() {
        let (k, v) = split_assignment(b, "bind")?;
        bindings.insert(k.to_string(), v.to_string());
    }
    ScalingAssumption::new(family, bindings).map_err(flag_err("bind"))
}

fn range(a: &CurveArgs) -> (f64, f64) {
    (a.min.unwrap_or(2.0), a.max.unwrap_or(34.0))
}

fn fmt_crossings(c: &[f64]) -> String {
    let items: Vec<String> = c.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", items.join(", "))
}

fn frontier_curves(a: CurveArgs, cfg: &ConfigFile) -> Res<Output> {
    let assumption = assumption(&a)?;
    let (min, max) = range(&a);
    let steps = a.steps.unwrap_or(321);
    let mut blocks = Vec::new();
    let mut summary = Vec::new();
    for p in select_profiles(&a.profile, cfg)? {
        let points = runtime_curves(&assumption, &p, min, max, steps)?;
        let crossings = break_even(&assumption, &p, min, max)?;
        summary.push(format!("{} {}: crossings at log2M {}", assumption.family().name(), p.name, fmt_crossings(&crossings)));
        blocks.push((p.name.clone(), curves_to_csv(&points)));
    }
    Ok(Output { body: join_blocks(blocks), summary: summary.join("; ") })
}

fn frontier_breakeven(a: CurveArgs, cfg: &ConfigFile) -> Res<Output> {
    let assumption = assumption(&a)?;
    let (min, max) = range(&a);
    let mut body = String::new();
    let mut summary = Vec::new();
    for p in select_profiles(&a.profile, cfg)? {
        let crossings = break_even(&assumption, &p, min, max)?;
        summary.push(format!("{}: {}", p.name, fmt_crossings(&crossings)));
        let report = BreakEvenReport {
            family: assumption.family().name().to_string(),
            profile: p.name.clone(),
            crossings_log2m: crossings,
        };
        body.push_str(&report.to_json());
        body.push('\n');
    }
    Ok(Output { body, summary: summary.join("; ") })
}

fn decompose(a: DecomposeArgs) -> Res<Output> {
    let path = require(a.input, "input")?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let matrix = TripletMatrix::parse_csv(&text)?.to_dense()?;
    let tolerance = a.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let terms = decompose_hermitian(&matrix, tolerance)?;
    let n = matrix.nrows().trailing_zeros() as usize;
    let residual = (reconstruct(&terms, n)? - &matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let body = if terms.is_empty() {
        format!("{{\"n\":{n},\"terms\":[]}}\n")
    } else {
        LcpObservable::new(terms.clone())?.to_json() + "\n"
    };
    Ok(Output { body, summary: format!("{} terms, reconstruction residual {residual:e}", terms.len()) })
}

fn validate_norms(a: NormArgs, seed: RngSeed) -> Res<Output> {
    let kind = require(a.kind, "kind")?;
    let n = a.n.unwrap_or(10);
    let (default_k, default_draws, default_mode) = match kind {
        NormKind::Infinity => (8, 100, EntryMode::Real),
        NormKind::Spectral => (16, 50, EntryMode::ComplexOffdiag),
    };
    let k = a.k.unwrap_or(default_k);
    let draws = a.draws.unwrap_or(default_draws);
    let mode = a.entries.unwrap_or(default_mode);
    let iterations = a.iterations.unwrap_or(5000);
    if draws == 0 {
        return Err(CliError::usage("--draws must be at least 1"));
    }
    check_qubits(n, 16)?;
    let formula = match kind {
        NormKind::Infinity => infinity_norm_estimate(k as f64, n as f64),
        NormKind::Spectral => spectral_norm_estimate(k as f64),
    };
    let rows: Vec<(RngSeed, f64, f64)> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let s = seed.child(i);
            let o = gen_sparse_hermitian(n, k, mode, s.child(0))?;
            Ok(match kind {
                NormKind::Infinity => (s, o.centered_max_abs_row_sum(), f64::NAN),
                NormKind::Spectral => (s, power_iteration_norm(&o, iterations, 1e-10, s.child(1)), spectral_bound(&o)),
            })
        })
        .collect::<Res<_>>()?;
    let mut body = String::from(match kind {
        NormKind::Infinity => "draw,seed,empirical,formula,ratio\n",
        NormKind::Spectral => "draw,seed,empirical,formula,ratio,spectral_bound,bound_holds\n",
    });
    let mut violations = 0;
    for (i, (s, emp, bound)) in rows.iter().enumerate() {
        let _ = write!(body, "{i},{s},{},{},{}", format_sig9(*emp), format_sig9(formula), format_sig9(emp / formula));
        if kind == NormKind::Spectral {
            let holds = *bound >= *emp;
            violations += usize::from(!holds);
            let _ = write!(body, ",{},{holds}", format_sig9(*bound));
        }
        body.push('\n');
    }
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / draws as f64;
    let ratio = mean / formula;
    let _ = write!(body, "# draws={draws} mean_empirical={} formula={} mean_ratio={}", format_sig9(mean), format_sig9(formula), format_sig9(ratio));
    if kind == NormKind::Spectral {
        let _ = write!(body, " bound_violations={violations}");
    }
    body.push('\n');
    Ok(Output {
        body,
        summary: format!("{draws} draws: mean empirical {mean:.4}, formula {formula:.4}, ratio {ratio:.4}"),
    })
}
