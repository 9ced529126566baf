use std::str::FromStr;

use super::csv::{format_f64, Source, SweepKey, SweepResult, SweepRow};
use super::preset::{PlatformPreset, EXASCALE};
use crate::broadcast::BroadcastAlg;
use crate::cost::{
    exact_sqrt, hsumma_comm_cost, hsumma_comm_cost_continuous, optimal_groups, regime_check,
    summa_comm_cost, CostBreakdown, HockneyParams, ModelProblem,
};
use crate::error::{Error, Result};
use crate::grid::make_grid;
use crate::sim::{measured_vs_model, run_hsumma, run_summa, SimConfig, SimMetrics};

pub const MAX_SIM_PROCS: u64 = 4096;
pub const MAX_SIM_N: u64 = 4096;

/// Refuses simulations larger than a desk can run unless overridden.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DeskGuard {
    pub allow_large: bool,
}

impl DeskGuard {
    pub fn check(&self, n: u64, p: u64) -> Result<()> {
        if self.allow_large {
            return Ok(());
        }
        if p > MAX_SIM_PROCS {
            return Err(Error::GuardExceeded {
                what: "p",
                value: p,
                limit: MAX_SIM_PROCS,
            });
        }
        if n > MAX_SIM_N {
            return Err(Error::GuardExceeded {
                what: "n",
                value: n,
                limit: MAX_SIM_N,
            });
        }
        Ok(())
    }
}

/// Problem and machine shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub n: u64,
    pub p: u64,
    pub b: u64,
    pub outer_b: u64,
    pub alg: BroadcastAlg,
    pub params: HockneyParams,
    pub seed: u64,
}

impl Setup {
    pub fn from_preset(preset: &PlatformPreset, alg: BroadcastAlg) -> Self {
        Self {
            n: preset.n,
            p: preset.p,
            b: preset.b,
            outer_b: preset.outer_b,
            alg,
            params: preset.params,
            seed: 0,
        }
    }

    pub fn problem(&self) -> Result<ModelProblem> {
        ModelProblem::with_outer_block(self.n, self.p, self.b, self.outer_b)
    }

    fn describe(&self) -> String {
        format!(
            "n={} p={} b={} B={} bcast={} alpha={} beta={} gamma={} seed={}",
            self.n,
            self.p,
            self.b,
            self.outer_b,
            self.alg,
            format_f64(self.params.alpha),
            format_f64(self.params.beta),
            format_f64(self.params.gamma),
            self.seed
        )
    }

    /// A `sqrt(p) x sqrt(p)` simulation with `sqrt(G) x sqrt(G)` groups.
    pub fn sim_config(&self, groups: u64) -> Result<SimConfig> {
        let side = exact_sqrt(self.p).ok_or(Error::NotSquare {
            what: "p",
            value: self.p,
        })?;
        let g = exact_sqrt(groups).ok_or(Error::InadmissibleGroups {
            groups,
            procs: self.p,
            reason: "G is not a perfect square",
        })?;
        let grid = make_grid(side as usize, side as usize)?;
        let cfg = SimConfig::new(
            grid,
            (g as usize, g as usize),
            self.n as usize,
            self.b as usize,
            self.outer_b as usize,
            self.alg,
            self.params,
        )?;
        Ok(cfg.with_seed(self.seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Model,
    Simulate,
    Both,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "model" => Ok(Self::Model),
            "simulate" | "simulation" | "sim" => Ok(Self::Simulate),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown mode `{other}` (expected model, simulate or both)")),
        }
    }
}

/// How `sweep_procs` picks the HSUMMA group count for each `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupRule {
    One,
    /// The admissible `G` nearest `sqrt(p)`.
    Sqrt,
    /// The model's optimum over admissible `G`.
    Best,
}

impl FromStr for GroupRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" => Ok(Self::One),
            "sqrt" => Ok(Self::Sqrt),
            "best" => Ok(Self::Best),
            other => Err(format!("unknown group rule `{other}` (expected 1, sqrt or best)")),
        }
    }
}

fn model_row(key: u64, c: &CostBreakdown, source: Source) -> SweepRow {
    SweepRow {
        key,
        overall_comm: Some(c.comm_s()),
        time_mean: Some(c.total_s),
        latency_s: Some(c.latency_s),
        bandwidth_s: Some(c.bandwidth_s),
        compute_s: Some(c.compute_s),
        source,
        extra: Vec::new(),
    }
}

fn sim_row(key: u64, m: &SimMetrics, source: Source) -> SweepRow {
    SweepRow {
        key,
        overall_comm: Some(m.comm_time_s),
        time_mean: Some(m.makespan_s),
        latency_s: Some(m.latency_s),
        bandwidth_s: Some(m.bandwidth_s),
        compute_s: Some(m.compute_time_s),
        source,
        extra: Vec::new(),
    }
}

/// Runs one seeded simulation of `setup` with `G` groups.
pub fn simulate_groups(setup: &Setup, groups: u64) -> Result<SimMetrics> {
    let cfg = setup.sim_config(groups)?;
    let (a, b) = cfg.random_inputs()?;
    run_hsumma(&a, &b, &cfg).map(|(_, m)| m)
}

/// Runs SUMMA on the `sqrt(p) x sqrt(p)` grid of `setup`.
pub fn simulate_summa(setup: &Setup) -> Result<SimMetrics> {
    let cfg = setup.sim_config(1)?;
    let (a, b) = cfg.random_inputs()?;
    run_summa(&a, &b, &cfg).map(|(_, m)| m)
}

/// Group counts `d^2` for every divisor `d` of `sqrt(p)`.
pub fn admissible_groups(p: u64) -> Result<Vec<u64>> {
    let side = exact_sqrt(p).ok_or(Error::NotSquare { what: "p", value: p })?;
    Ok((1..=side).filter(|d| side % d == 0).map(|d| d * d).collect())
}

/// Communication and execution time against the group count.
///
/// Group counts that cannot be arranged on the grid produce a `skipped` row
/// and a leading comment naming the reason.
pub fn sweep_groups(
    setup: &Setup,
    groups: &[u64],
    mode: Mode,
    guard: DeskGuard,
) -> Result<SweepResult> {
    let prob = setup.problem()?;
    if mode != Mode::Model {
        guard.check(setup.n, setup.p)?;
    }
    let extra = match mode {
        Mode::Both => vec!["model_overall_comm", "deviation"],
        _ => vec![],
    };
    let mut out = SweepResult::new(SweepKey::Groups, extra);
    out.comments.push(setup.describe());
    out.comments.push(format!("regime={}", regime_check(&prob, &setup.params)));
    let model = setup.alg.cost_model();

    for &g in groups {
        let analytic = hsumma_comm_cost(&prob, &setup.params, model, g);
        let outcome = analytic.and_then(|c| match mode {
            Mode::Model => Ok(model_row(g, &c, Source::Model)),
            Mode::Simulate => simulate_groups(setup, g).map(|m| sim_row(g, &m, Source::Simulation)),
            Mode::Both => {
                let m = simulate_groups(setup, g)?;
                let cmp = measured_vs_model(&m, &c)?;
                let mut row = sim_row(g, &m, Source::Both);
                row.extra = vec![format_f64(c.comm_s()), format_f64(cmp.comm_deviation())];
                Ok(row)
            }
        });
        match outcome {
            Ok(row) => out.rows.push(row),
            Err(e @ (Error::InadmissibleGroups { .. }
            | Error::GroupCountOutOfRange { .. }
            | Error::Divisibility { .. }
            | Error::NotSquare { .. })) => {
                out.comments.push(format!("skipped G={g}: {e}"));
                out.rows.push(SweepRow::skipped(g, out.extra_columns.len()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn nearest_sqrt_groups(p: u64) -> Result<u64> {
    let sqrt_p = (p as f64).sqrt();
    let all = admissible_groups(p)?;
    Ok(all
        .into_iter()
        .min_by(|a, b| {
            (*a as f64 - sqrt_p)
                .abs()
                .total_cmp(&(*b as f64 - sqrt_p).abs())
                .then(a.cmp(b))
        })
        .expect("G = 1 is always admissible"))
}

/// Group count chosen by `rule` for `p` processors.
pub fn pick_groups(setup: &Setup, p: u64, rule: GroupRule) -> Result<u64> {
    match rule {
        GroupRule::One => Ok(1),
        GroupRule::Sqrt => nearest_sqrt_groups(p),
        GroupRule::Best => {
            let prob = ModelProblem::with_outer_block(setup.n, p, setup.b, setup.outer_b)?;
            let candidates = admissible_groups(p)?;
            optimal_groups(&prob, &setup.params, setup.alg.cost_model(), &candidates).map(|(g, _)| g)
        }
    }
}

/// SUMMA and HSUMMA against the processor count, two rows per `p`.
///
/// Trailing columns name the algorithm and the group count used. Every `p`
/// must be a perfect square.
pub fn sweep_procs(
    setup: &Setup,
    procs: &[u64],
    rule: GroupRule,
    mode: Mode,
    guard: DeskGuard,
) -> Result<SweepResult> {
    if mode == Mode::Both {
        return Err(Error::DimensionMismatch {
            expected: "model or simulate mode".into(),
            actual: "both".into(),
        });
    }
    let mut out = SweepResult::new(SweepKey::Procs, vec!["algorithm", "NB_groups"]);
    out.comments.push(format!(
        "n={} b={} B={} bcast={} alpha={} beta={} gamma={} seed={} groups={:?}",
        setup.n,
        setup.b,
        setup.outer_b,
        setup.alg,
        format_f64(setup.params.alpha),
        format_f64(setup.params.beta),
        format_f64(setup.params.gamma),
        setup.seed,
        rule
    ));
    for &p in procs {
        exact_sqrt(p).ok_or(Error::NotSquare { what: "p", value: p })?;
        if mode == Mode::Simulate {
            guard.check(setup.n, p)?;
        }
    }
    let model = setup.alg.cost_model();
    for &p in procs {
        let at = Setup { p, ..*setup };
        let prob = at.problem()?;
        let g = pick_groups(&at, p, rule)?;
        let (mut summa, mut hsumma) = match mode {
            Mode::Model => (
                model_row(p, &summa_comm_cost(&prob, &at.params, model), Source::Model),
                model_row(p, &hsumma_comm_cost(&prob, &at.params, model, g)?, Source::Model),
            ),
            _ => (
                sim_row(p, &simulate_summa(&at)?, Source::Simulation),
                sim_row(p, &simulate_groups(&at, g)?, Source::Simulation),
            ),
        };
        summa.extra = vec!["summa".into(), "1".into()];
        hsumma.extra = vec!["hsumma".into(), g.to_string()];
        out.rows.push(summa);
        out.rows.push(hsumma);
    }
    Ok(out)
}

/// Predicted SUMMA and HSUMMA execution time at exascale for
/// `G = 1, 2, 4, ..., p`, Van de Geijn broadcasts.
///
/// Group counts that are not perfect squares are evaluated with the
/// real-valued closed form. HSUMMA fills the main columns; SUMMA is repeated
/// in trailing columns.
pub fn predict_exascale() -> Result<SweepResult> {
    predict_with(&EXASCALE)
}

pub fn predict_with(preset: &PlatformPreset) -> Result<SweepResult> {
    let setup = Setup::from_preset(preset, BroadcastAlg::VanDeGeijn);
    let prob = setup.problem()?;
    let model = setup.alg.cost_model();
    let summa = summa_comm_cost(&prob, &setup.params, model);
    let mut out = SweepResult::new(SweepKey::Groups, vec!["summa_overall_comm", "summa_time_mean"]);
    out.comments.push(format!("preset={} {}", preset.name, setup.describe()));
    out.comments.push(format!("regime={}", regime_check(&prob, &setup.params)));
    let mut g = 1u64;
    while g <= prob.p {
        let c = hsumma_comm_cost_continuous(&prob, &setup.params, model, g as f64)?;
        let mut row = model_row(g, &c, Source::Model);
        row.extra = vec![format_f64(summa.comm_s()), format_f64(summa.total_s)];
        out.rows.push(row);
        g *= 2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::preset::BGP;

    fn desk() -> Setup {
        Setup {
            n: 64,
            p: 16,
            b: 4,
            outer_b: 4,
            alg: BroadcastAlg::VanDeGeijn,
            params: HockneyParams::new(1e-4, 1e-9, 0.0).unwrap(),
            seed: 3,
        }
    }

    #[test]
    fn admissible_lists() {
        assert_eq!(admissible_groups(1).unwrap(), vec![1]);
        assert_eq!(admissible_groups(16).unwrap(), vec![1, 4, 16]);
        assert_eq!(admissible_groups(36).unwrap(), vec![1, 4, 9, 36]);
        assert!(admissible_groups(128).is_err());
    }

    #[test]
    fn single_group_row_is_summa() {
        let s = Setup::from_preset(&BGP, BroadcastAlg::VanDeGeijn);
        let r = sweep_groups(&s, &[1], Mode::Model, DeskGuard::default()).unwrap();
        let summa = summa_comm_cost(&s.problem().unwrap(), &s.params, s.alg.cost_model());
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].overall_comm, Some(summa.comm_s()));
        assert!(r.comments.iter().any(|c| c == "regime=InteriorMinimum"));
    }

    #[test]
    fn inadmissible_groups_are_skipped() {
        let r = sweep_groups(&desk(), &[1, 2, 4, 9], Mode::Model, DeskGuard::default()).unwrap();
        let sources: Vec<_> = r.rows.iter().map(|r| r.source).collect();
        assert_eq!(sources, [Source::Model, Source::Skipped, Source::Model, Source::Skipped]);
        assert_eq!(r.comments.iter().filter(|c| c.starts_with("skipped")).count(), 2);
    }

    #[test]
    fn both_mode_agrees() {
        let r = sweep_groups(&desk(), &[1, 4, 16], Mode::Both, DeskGuard::default()).unwrap();
        for row in &r.rows {
            assert_eq!(row.source, Source::Both);
            let dev: f64 = row.extra[1].parse().unwrap();
            assert!(dev < 1e-9, "G={} deviation {dev}", row.key);
        }
        assert!(r.to_csv().contains(",source,model_overall_comm,deviation\n"));
    }

    #[test]
    fn guard_blocks_large_simulations() {
        let mut s = desk();
        s.n = 8192;
        s.b = 64;
        s.outer_b = 64;
        let e = sweep_groups(&s, &[1], Mode::Simulate, DeskGuard::default()).unwrap_err();
        assert!(matches!(e, Error::GuardExceeded { what: "n", .. }));
        assert!(sweep_groups(&s, &[1], Mode::Model, DeskGuard::default()).is_ok());
    }

    #[test]
    fn nearest_sqrt_rule() {
        assert_eq!(nearest_sqrt_groups(16).unwrap(), 4);
        assert_eq!(nearest_sqrt_groups(64).unwrap(), 4);
        assert_eq!(nearest_sqrt_groups(256).unwrap(), 16);
        assert_eq!(nearest_sqrt_groups(1).unwrap(), 1);
    }

    #[test]
    fn procs_sweep_rejects_non_square() {
        let s = desk();
        assert!(matches!(
            sweep_procs(&s, &[16, 32], GroupRule::Best, Mode::Model, DeskGuard::default()),
            Err(Error::NotSquare { value: 32, .. })
        ));
    }

    #[test]
    fn single_proc_has_no_comm() {
        let r = sweep_procs(&desk(), &[1], GroupRule::Sqrt, Mode::Model, DeskGuard::default()).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows.iter().all(|r| r.overall_comm == Some(0.0)));
    }

    #[test]
    fn exascale_curve_shape() {
        let r = predict_exascale().unwrap();
        assert_eq!(r.rows.len(), 21);
        assert_eq!(r.rows[0].key, 1);
        assert_eq!(r.rows[20].key, 1 << 20);
        let best = r
            .rows
            .iter()
            .min_by(|a, b| a.time_mean.unwrap().total_cmp(&b.time_mean.unwrap()))
            .unwrap();
        assert_eq!(best.key, 1024);
    }
}
