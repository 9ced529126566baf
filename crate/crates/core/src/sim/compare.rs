use std::fmt;

use super::SimMetrics;
use crate::cost::CostBreakdown;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDeviation {
    pub component: &'static str,
    pub simulated: f64,
    pub model: f64,
    /// `|simulated - model| / model`; zero when both are zero.
    pub relative: f64,
}

/// Per-component deviation of a simulated run from its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub components: Vec<ComponentDeviation>,
}

impl ModelComparison {
    pub fn get(&self, component: &str) -> Option<&ComponentDeviation> {
        self.components.iter().find(|c| c.component == component)
    }

    /// Relative deviation of the communication time.
    pub fn comm_deviation(&self) -> f64 {
        self.get("comm").map_or(f64::INFINITY, |c| c.relative)
    }

    pub fn comm_within(&self, tolerance: f64) -> bool {
        self.comm_deviation() <= tolerance
    }
}

impl fmt::Display for ModelComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>14} {:>14} {:>10}", "component", "simulated", "model", "rel.dev")?;
        for c in &self.components {
            writeln!(
                f,
                "{:<10} {:>14.6e} {:>14.6e} {:>10.3e}",
                c.component, c.simulated, c.model, c.relative
            )?;
        }
        Ok(())
    }
}

pub fn relative_deviation(simulated: f64, model: f64) -> f64 {
    if simulated == model {
        0.0
    } else if model == 0.0 {
        f64::INFINITY
    } else {
        (simulated - model).abs() / model.abs()
    }
}

fn mismatch(field: &'static str, simulated: impl fmt::Debug, model: impl fmt::Debug) -> Error {
    Error::ParameterMismatch {
        field,
        simulated: format!("{simulated:?}"),
        model: format!("{model:?}"),
    }
}

/// Compares a simulated run against the analytic cost of the same
/// configuration. The two must agree on `n`, `p`, `b`, `B`, `G`, the
/// broadcast algorithm and the Hockney parameters, and the grid must be square.
pub fn measured_vs_model(metrics: &SimMetrics, analytic: &CostBreakdown) -> Result<ModelComparison> {
    let prob = &analytic.problem;
    if metrics.grid.0 != metrics.grid.1 {
        return Err(mismatch("grid shape", metrics.grid, "square"));
    }
    if metrics.n as u64 != prob.n {
        return Err(mismatch("n", metrics.n, prob.n));
    }
    if metrics.procs() as u64 != prob.p {
        return Err(mismatch("p", metrics.procs(), prob.p));
    }
    if metrics.block as u64 != prob.b {
        return Err(mismatch("b", metrics.block, prob.b));
    }
    if metrics.outer_block as u64 != prob.outer_b && metrics.group_count() != 1 {
        return Err(mismatch("B", metrics.outer_block, prob.outer_b));
    }
    if metrics.group_count() as f64 != analytic.groups {
        return Err(mismatch("G", metrics.group_count(), analytic.groups));
    }
    if metrics.groups.0 != metrics.groups.1 {
        return Err(mismatch("group shape", metrics.groups, "square"));
    }
    if metrics.alg.cost_model() != analytic.model {
        return Err(mismatch("broadcast", metrics.alg, analytic.model));
    }
    if metrics.params != analytic.params {
        return Err(mismatch("params", metrics.params, analytic.params));
    }

    let row = |component, simulated, model| ComponentDeviation {
        component,
        simulated,
        model,
        relative: relative_deviation(simulated, model),
    };
    Ok(ModelComparison {
        components: vec![
            row("latency", metrics.latency_s, analytic.latency_s),
            row("bandwidth", metrics.bandwidth_s, analytic.bandwidth_s),
            row("comm", metrics.comm_time_s, analytic.comm_s()),
            row("compute", metrics.compute_time_s, analytic.compute_s),
            row("total", metrics.makespan_s, analytic.total_s),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::BroadcastAlg;
    use crate::cost::{hsumma_comm_cost, summa_comm_cost, HockneyParams, ModelProblem};
    use crate::grid::make_grid;
    use crate::sim::{run_hsumma, run_summa, SimConfig};

    #[test]
    fn binomial_p16_within_one_percent() {
        let params = HockneyParams::new(1e-4, 1e-9, 1e-10).unwrap();
        let cfg = SimConfig::new(make_grid(4, 4).unwrap(), (1, 1), 64, 16, 16, BroadcastAlg::BinomialTree, params).unwrap();
        let (a, b) = cfg.random_inputs().unwrap();
        let (_, m) = run_summa(&a, &b, &cfg).unwrap();
        let prob = ModelProblem::new(64, 16, 16).unwrap();
        let model = summa_comm_cost(&prob, &params, BroadcastAlg::BinomialTree.cost_model());
        let cmp = measured_vs_model(&m, &model).unwrap();
        assert!(cmp.comm_within(0.01), "{cmp}");
        // One step by hand: two binomial broadcasts over 4 ranks of 16*16 elements.
        let step = 2.0 * 2.0 * (1e-4 + 256.0 * 1e-9);
        assert!((m.comm_time_s - 4.0 * step).abs() < 1e-15);
        assert_eq!(cmp.get("compute").unwrap().relative, 0.0);
    }

    #[test]
    fn single_rank_has_zero_comm_on_both_sides() {
        let params = HockneyParams::new(1e-4, 1e-9, 0.0).unwrap();
        let cfg = SimConfig::new(make_grid(1, 1).unwrap(), (1, 1), 8, 4, 4, BroadcastAlg::VanDeGeijn, params).unwrap();
        let (a, b) = cfg.random_inputs().unwrap();
        let (_, m) = run_hsumma(&a, &b, &cfg).unwrap();
        let prob = ModelProblem::new(8, 1, 4).unwrap();
        let model = hsumma_comm_cost(&prob, &params, BroadcastAlg::VanDeGeijn.cost_model(), 1).unwrap();
        let cmp = measured_vs_model(&m, &model).unwrap();
        assert_eq!(cmp.get("comm").unwrap().simulated, 0.0);
        assert_eq!(cmp.get("comm").unwrap().model, 0.0);
        assert_eq!(cmp.comm_deviation(), 0.0);
    }

    #[test]
    fn mismatched_parameters_rejected() {
        let params = HockneyParams::new(1e-4, 1e-9, 0.0).unwrap();
        let cfg = SimConfig::new(make_grid(2, 2).unwrap(), (1, 1), 8, 2, 2, BroadcastAlg::BinomialTree, params).unwrap();
        let (a, b) = cfg.random_inputs().unwrap();
        let (_, m) = run_summa(&a, &b, &cfg).unwrap();
        let other_n = summa_comm_cost(&ModelProblem::new(16, 4, 2).unwrap(), &params, BroadcastAlg::BinomialTree.cost_model());
        assert!(matches!(measured_vs_model(&m, &other_n), Err(Error::ParameterMismatch { field: "n", .. })));
        let prob = ModelProblem::new(8, 4, 2).unwrap();
        let other_alg = summa_comm_cost(&prob, &params, BroadcastAlg::Flat.cost_model());
        assert!(matches!(measured_vs_model(&m, &other_alg), Err(Error::ParameterMismatch { field: "broadcast", .. })));
        let other_g = hsumma_comm_cost(&prob, &params, BroadcastAlg::BinomialTree.cost_model(), 4).unwrap();
        assert!(matches!(measured_vs_model(&m, &other_g), Err(Error::ParameterMismatch { field: "G", .. })));
    }
}
