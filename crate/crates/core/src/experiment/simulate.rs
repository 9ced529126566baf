use std::fmt;

use super::csv::{format_f64, Source, SweepKey, SweepResult, SweepRow};
use super::sweep::DeskGuard;
use crate::error::Result;
use crate::grid::gather_matrix;
use crate::sim::{reference_multiply, run_hsumma, run_summa, SimConfig, SimMetrics};

/// Largest `n` checked against the sequential product.
pub const MAX_VERIFY_N: usize = 512;
pub const VERIFY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Ok { rel_error: f64 },
    Failed { rel_error: f64 },
    /// `n` was too large to verify.
    Skipped,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Self::Failed { .. })
    }

    fn label(&self) -> &'static str {
        match self {
            Self::Ok { .. } => "ok",
            Self::Failed { .. } => "fail",
            Self::Skipped => "skipped",
        }
    }

    fn rel_error(&self) -> Option<f64> {
        match *self {
            Self::Ok { rel_error } | Self::Failed { rel_error } => Some(rel_error),
            Self::Skipped => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rel_error() {
            Some(e) => write!(f, "{} (relative error {e:.3e})", self.label()),
            None => f.write_str(self.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub metrics: SimMetrics,
    pub verdict: Verdict,
}

impl SimulationOutcome {
    /// A one-row table keyed by the group count.
    pub fn to_result(&self) -> SweepResult {
        let m = &self.metrics;
        let mut out = SweepResult::new(
            SweepKey::Groups,
            vec!["msg_count", "volume_elems", "verified", "rel_error"],
        );
        out.rows.push(SweepRow {
            key: m.group_count() as u64,
            overall_comm: Some(m.comm_time_s),
            time_mean: Some(m.makespan_s),
            latency_s: Some(m.latency_s),
            bandwidth_s: Some(m.bandwidth_s),
            compute_s: Some(m.compute_time_s),
            source: Source::Simulation,
            extra: vec![
                m.msg_count.to_string(),
                m.volume_elems.to_string(),
                self.verdict.label().to_owned(),
                self.verdict.rel_error().map(format_f64).unwrap_or_default(),
            ],
        });
        out
    }

    pub fn summary(&self) -> String {
        let m = &self.metrics;
        format!(
            "{} n={} grid={}x{} groups={}x{} b={} B={} bcast={}\n\
             makespan {:.6e} s, communication {:.6e} s (latency {:.6e}, bandwidth {:.6e}), compute {:.6e} s\n\
             {} messages, {} elements moved ({} between groups)\n\
             verification: {}\n",
            m.algorithm,
            m.n,
            m.grid.0,
            m.grid.1,
            m.groups.0,
            m.groups.1,
            m.block,
            m.outer_block,
            m.alg,
            m.makespan_s,
            m.comm_time_s,
            m.latency_s,
            m.bandwidth_s,
            m.compute_time_s,
            m.msg_count,
            m.volume_elems,
            m.outer.volume_elems,
            self.verdict
        )
    }
}

/// Runs HSUMMA (or SUMMA when `summa` is set) on seeded random inputs and
/// checks the product against [`reference_multiply`] when `n <= 512`.
pub fn simulate(cfg: &SimConfig, summa: bool, guard: DeskGuard) -> Result<SimulationOutcome> {
    guard.check(cfg.n as u64, cfg.grid().size() as u64)?;
    cfg.validate()?;
    let (a, b) = cfg.random_inputs()?;
    let (c, metrics) = if summa {
        run_summa(&a, &b, cfg)?
    } else {
        run_hsumma(&a, &b, cfg)?
    };
    let verdict = if cfg.n <= MAX_VERIFY_N {
        let (ga, gb) = cfg.random_globals();
        let rel_error = gather_matrix(&c).relative_error(&reference_multiply(&ga, &gb)?);
        if rel_error <= VERIFY_TOLERANCE {
            Verdict::Ok { rel_error }
        } else {
            Verdict::Failed { rel_error }
        }
    } else {
        Verdict::Skipped
    };
    Ok(SimulationOutcome { metrics, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::BroadcastAlg;
    use crate::cost::HockneyParams;
    use crate::grid::make_grid;
    use crate::sim::Fault;

    fn cfg(groups: (usize, usize)) -> SimConfig {
        let params = HockneyParams::new(1e-4, 1e-9, 0.0).unwrap();
        SimConfig::new(make_grid(4, 4).unwrap(), groups, 16, 2, 4, BroadcastAlg::BinomialTree, params)
            .unwrap()
            .with_seed(7)
    }

    #[test]
    fn verified_run() {
        let out = simulate(&cfg((2, 2)), false, DeskGuard::default()).unwrap();
        assert!(matches!(out.verdict, Verdict::Ok { .. }));
        assert!(out.summary().contains("verification: ok"));
    }

    #[test]
    fn single_group_row_equals_summa_row() {
        let c = cfg((1, 1));
        let h = simulate(&c, false, DeskGuard::default()).unwrap();
        let s = simulate(&c, true, DeskGuard::default()).unwrap();
        assert_eq!(h.to_result().to_csv(), s.to_result().to_csv());
    }

    #[test]
    fn fault_fails_verification() {
        let mut c = cfg((2, 2));
        c.fault = Some(Fault::PivotOffByOne);
        let out = simulate(&c, false, DeskGuard::default()).unwrap();
        assert!(!out.verdict.passed());
        assert!(out.to_result().to_csv().contains(",fail,"));
    }
}
