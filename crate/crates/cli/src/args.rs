use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use shadow_frontier::cost::CostMode;
use shadow_frontier::frontier::HardwareProfile;
use shadow_frontier::shadow::Convention;
use shadow_frontier::sparse::EntryMode;
use shadow_frontier::RngSeed;

/// Plan and simulate classical-shadow versus direct-measurement estimation.
#[derive(Parser, Debug)]
#[command(name = "shadow-frontier", version, about)]
pub struct Cli {
    /// TOML file with per-command sections; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed, optionally with a stream id (`42` or `42:7`).
    #[arg(long, global = true, env = "SHADOW_FRONTIER_SEED")]
    pub seed: Option<RngSeed>,

    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form resource counts.
    #[command(subcommand)]
    Cost(CostCommand),
    /// Seeded Monte-Carlo trials of the estimators.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Wallclock comparisons on hardware profiles.
    #[command(subcommand)]
    Frontier(FrontierCommand),
    /// Pauli decomposition of a Hermitian matrix in triplet CSV form.
    Decompose(DecomposeArgs),
    /// Empirical check of the norm estimates on generated ensembles.
    ValidateNorms(NormArgs),
}

#[derive(Subcommand, Debug)]
pub enum CostCommand {
    Lcp(LcpCostArgs),
    Lhm(LhmCostArgs),
}

#[derive(Subcommand, Debug)]
pub enum SimulateCommand {
    ShadowLcp(SimArgs),
    ShadowLhm(SimArgs),
    FootageLcp(SimArgs),
    FootageLhm(SimArgs),
}

#[derive(Subcommand, Debug)]
pub enum FrontierCommand {
    Grid(GridArgs),
    Curves(CurveArgs),
    Breakeven(CurveArgs),
}

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shadow,
    Footage,
}

/// Merges `fallback` into `self` wherever `self` is unset.
macro_rules! fill_from {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl $t {
            pub fn fill_from(&mut self, fallback: Option<&$t>) {
                if let Some(fb) = fallback {
                    $( if self.$f.is_none() { self.$f = fb.$f.clone(); } )*
                }
            }
        }
    };
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct LcpCostArgs {
    /// Number of observables.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<f64>,
    /// Pauli terms per observable.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Pauli weight of each term.
    #[arg(long)]
    pub w: Option<f64>,
    /// Qubit count; defaults to w.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub mode: Option<CostMode>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Coefficient scale for the direct-measurement error split.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Mean squared coefficient in the shadow norm.
    #[arg(long)]
    pub coeff_mean_square: Option<f64>,
}
fill_from!(LcpCostArgs { m, l, w, n, eps, delta, mode, method, mu, coeff_mean_square });

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct LhmCostArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<f64>,
    /// Non-zeros per row.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub mode: Option<CostMode>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}
fill_from!(LhmCostArgs { m, k, n, eps, delta, mode, method });

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct SimArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Shots per trial (shadow) or per term/observable (footage); defaults to the bound.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Median-of-means groups; defaults to ceil(2 ln(2M/delta)).
    #[arg(long)]
    pub groups: Option<usize>,
    #[arg(long)]
    pub convention: Option<Convention>,
    /// Entry mode of sparse observables.
    #[arg(long)]
    pub entries: Option<EntryMode>,
    #[arg(long)]
    pub mu: Option<f64>,
}
fill_from!(SimArgs { n, m, l, w, k, eps, delta, trials, shots, groups, convention, entries, mu });

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct ProfileArgs {
    /// Hardware profile name.
    #[arg(long)]
    pub profile: Option<String>,
    /// Evaluate every known profile.
    #[arg(long)]
    #[serde(default)]
    pub all_profiles: bool,
}

impl ProfileArgs {
    pub fn fill_from(&mut self, fb: Option<&ProfileArgs>) {
        if let Some(fb) = fb {
            self.profile = self.profile.take().or(fb.profile.clone());
            self.all_profiles |= fb.all_profiles;
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct GridArgs {
    /// Problem family: lcp or lhm.
    #[arg(long)]
    pub family: Option<String>,
    /// First swept axis as name:min:max:steps.
    #[arg(long)]
    pub x: Option<String>,
    /// Second swept axis as name:min:max:steps.
    #[arg(long)]
    pub y: Option<String>,
    /// Fixed parameter as name=value (repeatable).
    #[arg(long)]
    pub set: Option<Vec<String>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

impl GridArgs {
    pub fn fill_from(&mut self, fb: Option<&GridArgs>) {
        if let Some(fb) = fb {
            self.family = self.family.take().or(fb.family.clone());
            self.x = self.x.take().or(fb.x.clone());
            self.y = self.y.take().or(fb.y.clone());
            self.set = self.set.take().or(fb.set.clone());
            self.profile.fill_from(Some(&fb.profile));
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct CurveArgs {
    /// Scaling family: lcp_fig2c, lhm_fig2d, custom_lcp or custom_lhm.
    #[arg(long)]
    pub family: Option<String>,
    /// Parameter law as name=expression over M and log2M (repeatable).
    #[arg(long)]
    pub bind: Option<Vec<String>>,
    /// Smallest log2 M.
    #[arg(long)]
    pub min: Option<f64>,
    /// Largest log2 M.
    #[arg(long)]
    pub max: Option<f64>,
    /// Curve points (curves only).
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

impl CurveArgs {
    pub fn fill_from(&mut self, fb: Option<&CurveArgs>) {
        if let Some(fb) = fb {
            self.family = self.family.take().or(fb.family.clone());
            self.bind = self.bind.take().or(fb.bind.clone());
            self.min = self.min.or(fb.min);
            self.max = self.max.or(fb.max);
            self.steps = self.steps.or(fb.steps);
            self.profile.fill_from(Some(&fb.profile));
        }
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct DecomposeArgs {
    /// Triplet CSV file (`row,col,re,im`).
    pub input: Option<PathBuf>,
    /// Coefficients below this magnitude are dropped.
    #[arg(long)]
    pub tolerance: Option<f64>,
}
fill_from!(DecomposeArgs { input, tolerance });

#[derive(ValueEnum, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Infinity,
    Spectral,
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct NormArgs {
    #[arg(long, value_enum)]
    pub kind: Option<NormKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub entries: Option<EntryMode>,
    /// Power-iteration cap for the spectral campaign.
    #[arg(long)]
    pub iterations: Option<usize>,
}
fill_from!(NormArgs { kind, n, k, draws, entries, iterations });

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    pub lcp: Option<LcpCostArgs>,
    pub lhm: Option<LhmCostArgs>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub shadow_lcp: Option<SimArgs>,
    pub shadow_lhm: Option<SimArgs>,
    pub footage_lcp: Option<SimArgs>,
    pub footage_lhm: Option<SimArgs>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FrontierSection {
    pub grid: Option<GridArgs>,
    pub curves: Option<CurveArgs>,
    pub breakeven: Option<CurveArgs>,
}

/// Contents of the `--config` file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<String>,
    pub jobs: Option<usize>,
    /// Extra hardware profiles, selectable by name.
    pub profiles: Option<Vec<HardwareProfile>>,
    pub cost: Option<CostSection>,
    pub simulate: Option<SimulateSection>,
    pub frontier: Option<FrontierSection>,
    pub decompose: Option<DecomposeArgs>,
    pub validate_norms: Option<NormArgs>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flag_wins_over_config() {
        let cli = Cli::try_parse_from(["shadow-frontier", "cost", "lhm", "--eps", "0.2"]).unwrap();
        let cfg: ConfigFile = toml::from_str("[cost.lhm]\nM = 10\neps = 0.1\n").unwrap();
        let Command::Cost(CostCommand::Lhm(mut a)) = cli.command else { panic!("wrong command") };
        a.fill_from(cfg.cost.as_ref().and_then(|c| c.lhm.as_ref()));
        assert_eq!(a.eps, Some(0.2));
        assert_eq!(a.m, Some(10.0));
        assert_eq!(a.k, None);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<ConfigFile>("[cost.lhm]\nepsilon = 0.1\n").is_err());
        assert!(toml::from_str::<ConfigFile>("threads = 2\n").is_err());
    }

    #[test]
    fn global_options_after_subcommand() {
        let cli = Cli::try_parse_from(["shadow-frontier", "frontier", "breakeven", "--seed", "3:4", "--jobs", "2"]).unwrap();
        assert_eq!(cli.seed, Some(RngSeed::new(3, 4)));
        assert_eq!(cli.jobs, Some(2));
    }
}
