//! The `hsumma` command line.
//!
//! Every problem or machine value is resolved in the order flag, then
//! `HSUMMA_*` environment variable, then `--config` file, then platform
//! preset, then built-in default.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use super::config::ConfigFile;
use super::csv::{format_f64, Source, SweepKey, SweepResult, SweepRow};
use super::preset::PresetChoice;
use super::simulate::simulate;
use super::sweep::{
    admissible_groups, predict_exascale, sweep_groups, sweep_procs, DeskGuard, GroupRule, Mode, Setup,
};
use super::validate::{run_validation, ValidateOptions};
use crate::broadcast::BroadcastAlg;
use crate::cost::{
    exact_sqrt, hsumma_comm_cost, optimal_groups, regime_check, summa_comm_cost, HockneyParams,
};
use crate::error::Error;
use crate::grid::make_grid;
use crate::sim::{Fault, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// `SxT` extents such as `4x4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims(pub usize, pub usize);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected ROWSxCOLS such as 4x4, got `{s}`");
        let (r, c) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let r: usize = r.trim().parse().map_err(|_| bad())?;
        let c: usize = c.trim().parse().map_err(|_| bad())?;
        if r == 0 || c == 0 {
            return Err(bad());
        }
        Ok(Self(r, c))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, Parser)]
#[command(name = "hsumma", version, about = "SUMMA and hierarchical SUMMA: cost model and grid simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one multiplication and verify the product.
    Simulate(SimulateArgs),
    /// Cost against the number of groups.
    SweepGroups(SweepGroupsArgs),
    /// SUMMA and HSUMMA cost against the number of processors.
    SweepProcs(SweepProcsArgs),
    /// Predicted execution time at exascale for G = 1, 2, 4, ..., p.
    PredictExascale(OutArgs),
    /// Run the invariant suite; exit 1 on any failure.
    Validate(ValidateArgs),
    /// Model cost of a single configuration.
    Cost(CostArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value file; `#` starts a comment.
    #[arg(long, env = "HSUMMA_CONFIG")]
    pub config: Option<PathBuf>,
    /// Platform defaults: none, grid5000, bgp or exascale.
    #[arg(long, env = "HSUMMA_PRESET")]
    pub preset: Option<PresetChoice>,
    /// Matrix order.
    #[arg(long, env = "HSUMMA_N")]
    pub n: Option<u64>,
    /// Number of processors (a perfect square unless --grid is given).
    #[arg(long, env = "HSUMMA_P")]
    pub p: Option<u64>,
    /// Processor grid, e.g. 4x4.
    #[arg(long, env = "HSUMMA_GRID")]
    pub grid: Option<Dims>,
    /// Group arrangement, e.g. 2x2.
    #[arg(long, env = "HSUMMA_GROUPS")]
    pub groups: Option<Dims>,
    /// Block size inside groups.
    #[arg(long = "b", env = "HSUMMA_B")]
    pub b: Option<u64>,
    /// Block size between groups (defaults to b).
    #[arg(long = "B", env = "HSUMMA_OUTER_B")]
    pub outer_b: Option<u64>,
    /// Broadcast algorithm: flat, binomial or van-de-geijn.
    #[arg(long, env = "HSUMMA_BCAST")]
    pub bcast: Option<BroadcastAlg>,
    /// Latency in seconds.
    #[arg(long, env = "HSUMMA_ALPHA")]
    pub alpha: Option<f64>,
    /// Seconds per element.
    #[arg(long, env = "HSUMMA_BETA")]
    pub beta: Option<f64>,
    /// Seconds per flop.
    #[arg(long, env = "HSUMMA_GAMMA")]
    pub gamma: Option<f64>,
    /// Seed of the random input matrices.
    #[arg(long, env = "HSUMMA_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutArgs {
    /// Write the CSV here instead of standard output.
    #[arg(long, env = "HSUMMA_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Run plain SUMMA instead of HSUMMA.
    #[arg(long)]
    pub summa: bool,
    /// Lift the desk-scale limits (p <= 4096, n <= 4096).
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepGroupsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Group counts to evaluate (default: every admissible count).
    #[arg(long = "G", value_delimiter = ',')]
    pub group_counts: Vec<u64>,
    /// model, simulate or both.
    #[arg(long, default_value = "model")]
    pub mode: Mode,
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepProcsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Processor counts (default: 4, 16, ..., 4^10 in model mode, up to 256 when simulating).
    #[arg(long, value_delimiter = ',')]
    pub procs: Vec<u64>,
    /// HSUMMA group count: 1, sqrt or best.
    #[arg(long, default_value = "best")]
    pub rule: GroupRule,
    /// model or simulate.
    #[arg(long, default_value = "model")]
    pub mode: Mode,
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Number of groups (default: the optimum over admissible counts).
    #[arg(long = "G")]
    pub group_count: Option<u64>,
}

/// Why a command stopped.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

/// Fully resolved values of [`CommonArgs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub preset: PresetChoice,
    pub n: Option<u64>,
    pub p: Option<u64>,
    pub grid: Option<Dims>,
    pub groups: Option<Dims>,
    pub b: Option<u64>,
    pub outer_b: Option<u64>,
    pub alg: BroadcastAlg,
    pub params: HockneyParams,
    pub seed: u64,
}

impl CommonArgs {
    /// Fills unset fields from `file`.
    fn fill_from(&mut self, file: &ConfigFile) -> Result<(), String> {
        fn fill<T: FromStr>(slot: &mut Option<T>, file: &ConfigFile, key: &str) -> Result<(), String>
        where
            T::Err: fmt::Display,
        {
            if slot.is_none() {
                *slot = file.parse(key)?;
            }
            Ok(())
        }
        fill(&mut self.preset, file, "preset")?;
        fill(&mut self.n, file, "n")?;
        fill(&mut self.p, file, "p")?;
        fill(&mut self.grid, file, "grid")?;
        fill(&mut self.groups, file, "groups")?;
        fill(&mut self.b, file, "b")?;
        fill(&mut self.outer_b, file, "B")?;
        fill(&mut self.bcast, file, "bcast")?;
        fill(&mut self.alpha, file, "alpha")?;
        fill(&mut self.beta, file, "beta")?;
        fill(&mut self.gamma, file, "gamma")?;
        fill(&mut self.seed, file, "seed")?;
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, String> {
        let mut args = self.clone();
        if let Some(path) = &self.config {
            let file = ConfigFile::load(path)?;
            args.fill_from(&file)?;
        }
        let preset = args.preset.unwrap_or(PresetChoice::None);
        let base = preset.preset();
        let pick = |v: Option<f64>, d: Option<f64>, name: &str| {
            v.or(d).ok_or_else(|| format!("missing --{name} (no preset selected)"))
        };
        let params = HockneyParams::new(
            pick(args.alpha, base.map(|p| p.params.alpha), "alpha")?,
            pick(args.beta, base.map(|p| p.params.beta), "beta")?,
            args.gamma.or(base.map(|p| p.params.gamma)).unwrap_or(0.0),
        )
        .map_err(|e| e.to_string())?;
        let b = args.b.or(base.map(|p| p.b));
        Ok(Resolved {
            preset,
            n: args.n.or(base.map(|p| p.n)),
            p: args.p.or(args.grid.map(|g| (g.0 * g.1) as u64)).or(base.map(|p| p.p)),
            grid: args.grid,
            groups: args.groups,
            b,
            outer_b: args.outer_b.or(args.b).or(base.map(|p| p.outer_b)),
            alg: args.bcast.unwrap_or(BroadcastAlg::VanDeGeijn),
            params,
            seed: args.seed.unwrap_or(0),
        })
    }
}

impl Resolved {
    fn need<T>(v: Option<T>, name: &str) -> Result<T, String> {
        v.ok_or_else(|| format!("missing --{name}"))
    }

    pub fn setup(&self) -> Result<Setup, String> {
        if let (Some(g), Some(p)) = (self.grid, self.p) {
            if (g.0 * g.1) as u64 != p {
                return Err(format!("--grid {g} has {} ranks but p = {p}", g.0 * g.1));
            }
        }
        let b = Self::need(self.b, "b")?;
        Ok(Setup {
            n: Self::need(self.n, "n")?,
            p: Self::need(self.p, "p")?,
            b,
            outer_b: self.outer_b.unwrap_or(b),
            alg: self.alg,
            params: self.params,
            seed: self.seed,
        })
    }

    fn grid_dims(&self) -> Result<Dims, String> {
        if let Some(g) = self.grid {
            return Ok(g);
        }
        let p = Self::need(self.p, "grid")?;
        let side = exact_sqrt(p).ok_or_else(|| format!("p = {p} is not a perfect square; pass --grid"))?;
        Ok(Dims(side as usize, side as usize))
    }
}

fn emit(csv: &str, out: &OutArgs, stdout: &mut dyn Write) -> io::Result<()> {
    match &out.out {
        Some(path) => write_file(path, csv),
        None => stdout.write_all(csv.as_bytes()),
    }
}

fn write_file(path: &Path, text: &str) -> io::Result<()> {
    fs::write(path, text)
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let r = a.common.resolve().map_err(Failure::Usage)?;
    let setup = r.setup().map_err(Failure::Usage)?;
    let dims = r.grid_dims().map_err(Failure::Usage)?;
    let groups = r.groups.unwrap_or(Dims(1, 1));
    let mut cfg = SimConfig::new(
        make_grid(dims.0, dims.1)?,
        (groups.0, groups.1),
        setup.n as usize,
        setup.b as usize,
        setup.outer_b as usize,
        setup.alg,
        setup.params,
    )?
    .with_seed(setup.seed);
    if a.inject_fault {
        cfg.fault = Some(Fault::PivotOffByOne);
    }
    let outcome = simulate(&cfg, a.summa, DeskGuard { allow_large: a.allow_large })?;
    emit(&outcome.to_result().to_csv(), &a.out, stdout)?;
    stderr.write_all(outcome.summary().as_bytes())?;
    if outcome.verdict.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("product check failed: {}", outcome.verdict)))
    }
}

fn cmd_sweep_groups(a: &SweepGroupsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let r = a.common.resolve().map_err(Failure::Usage)?;
    let setup = r.setup().map_err(Failure::Usage)?;
    let groups = if a.group_counts.is_empty() {
        admissible_groups(setup.p)?
    } else {
        a.group_counts.clone()
    };
    let mut result = sweep_groups(&setup, &groups, a.mode, DeskGuard { allow_large: a.allow_large })?;
    result.comments.insert(0, format!("preset={}", r.preset));
    for row in result.rows.iter().filter(|r| r.source == Source::Skipped) {
        writeln!(stderr, "warning: G={} skipped", row.key)?;
    }
    emit(&result.to_csv(), &a.out, stdout)?;
    Ok(())
}

fn cmd_sweep_procs(a: &SweepProcsArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = a.common.resolve().map_err(Failure::Usage)?;
    let mut with_p = r;
    with_p.p = Some(with_p.p.unwrap_or(1));
    with_p.grid = None;
    let setup = with_p.setup().map_err(Failure::Usage)?;
    let procs = if !a.procs.is_empty() {
        a.procs.clone()
    } else if a.mode == Mode::Model {
        (1..=10).map(|k| 4u64.pow(k)).collect()
    } else {
        vec![4, 16, 64, 256]
    };
    let mut result = sweep_procs(&setup, &procs, a.rule, a.mode, DeskGuard { allow_large: a.allow_large })?;
    result.comments.insert(0, format!("preset={}", r.preset));
    emit(&result.to_csv(), &a.out, stdout)?;
    Ok(())
}

fn cmd_predict(a: &OutArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    emit(&predict_exascale()?.to_csv(), a, stdout)?;
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let opts = ValidateOptions {
        fault: a.inject_fault.then_some(Fault::PivotOffByOne),
    };
    let report = run_validation(&opts)?;
    emit(&report.to_csv(), &a.out, stdout)?;
    for c in &report.checks {
        writeln!(stderr, "{:<6} {}", c.status.as_str().to_uppercase(), c.name)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification("validation failed".into()))
    }
}

fn cmd_cost(a: &CostArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let r = a.common.resolve().map_err(Failure::Usage)?;
    let setup = r.setup().map_err(Failure::Usage)?;
    let prob = setup.problem()?;
    let model = setup.alg.cost_model();
    let (g, cost) = match a.group_count {
        Some(g) => (g, hsumma_comm_cost(&prob, &setup.params, model, g)?),
        None => optimal_groups(&prob, &setup.params, model, &admissible_groups(prob.p)?)?,
    };
    let summa = summa_comm_cost(&prob, &setup.params, model);
    let mut result = SweepResult::new(
        SweepKey::Groups,
        vec!["summa_overall_comm", "summa_time_mean", "regime"],
    );
    result.comments.push(format!("preset={}", r.preset));
    result.rows.push(SweepRow {
        key: g,
        overall_comm: Some(cost.comm_s()),
        time_mean: Some(cost.total_s),
        latency_s: Some(cost.latency_s),
        bandwidth_s: Some(cost.bandwidth_s),
        compute_s: Some(cost.compute_s),
        source: Source::Model,
        extra: vec![
            format_f64(summa.comm_s()),
            format_f64(summa.total_s),
            regime_check(&prob, &setup.params).to_string(),
        ],
    });
    emit(&result.to_csv(), &a.out, stdout)?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code: 0 success, 1 verification failure, 2 usage error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
        Command::SweepGroups(a) => cmd_sweep_groups(a, stdout, stderr),
        Command::SweepProcs(a) => cmd_sweep_procs(a, stdout),
        Command::PredictExascale(a) => cmd_predict(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout, stderr),
        Command::Cost(a) => cmd_cost(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("hsumma").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn dims_parse() {
        assert_eq!("4x4".parse::<Dims>().unwrap(), Dims(4, 4));
        assert_eq!("2X8".parse::<Dims>().unwrap(), Dims(2, 8));
        for bad in ["4", "4x", "x4", "0x4", "4*4", "-1x2"] {
            assert!(bad.parse::<Dims>().is_err(), "{bad}");
        }
    }

    #[test]
    fn malformed_grid_is_usage_error() {
        let (code, _, err) = run_capture(&["simulate", "--grid", "4by4", "--n", "16", "--b", "2"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("ROWSxCOLS"));
    }

    #[test]
    fn missing_values_are_usage_errors() {
        let (code, _, err) = run_capture(&["cost", "--n", "64", "--p", "16"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--b") || err.contains("--alpha"), "{err}");
    }

    #[test]
    fn flags_override_preset() {
        let (code, out, _) = run_capture(&["cost", "--preset", "bgp", "--G", "1", "--n", "32768"]);
        assert_eq!(code, EXIT_OK);
        let rows = super::super::csv::parse_rows(&out);
        let prob = crate::cost::ModelProblem::new(32768, 16384, 256).unwrap();
        let params = super::super::preset::BGP.params;
        let want = summa_comm_cost(&prob, &params, BroadcastAlg::VanDeGeijn.cost_model());
        assert_eq!(rows[0][1], format_f64(want.comm_s()));
        assert_eq!(rows[0][1], rows[0][7]);
        assert_eq!(rows[0][9], "InteriorMinimum");
    }
}
