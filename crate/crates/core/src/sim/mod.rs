//! Step-accurate execution of SUMMA and HSUMMA on a virtual processor grid.
//!
//! Every rank holds real tiles of `A`, `B` and `C`; panels move between ranks
//! only through broadcasts, and each broadcast is replayed through the
//! [`broadcast`](crate::broadcast) engine to advance per-rank clocks. There
//! is no barrier between steps: ranks only wait on messages.

mod algorithms;
mod compare;
mod timeline;

pub use algorithms::{run_hsumma, run_summa};
pub use compare::{measured_vs_model, ComponentDeviation, ModelComparison};
pub use timeline::{Level, LevelMetrics, MessageRecord, StepMetrics};

use crate::broadcast::BroadcastAlg;
use crate::cost::HockneyParams;
use crate::error::{Error, Result};
use crate::grid::{make_grouped_grid, scatter_matrix, BlockLayout, DistMatrix, GridSpec, GroupedGridSpec};
use crate::matrix::Matrix;

/// Deliberate bugs for checking that verification notices them.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Every step uses the pivot row of `B` belonging to the next step.
    PivotOffByOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub grouped: GroupedGridSpec,
    pub n: usize,
    /// Panel width inside a group (`b`).
    pub block: usize,
    /// Panel width between groups (`B`).
    pub outer_block: usize,
    pub alg: BroadcastAlg,
    pub params: HockneyParams,
    pub seed: u64,
    /// Keep a log of every message in [`SimMetrics::trace`].
    pub record_trace: bool,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl SimConfig {
    /// Checks `b | B` and that an outer panel never straddles two processor
    /// rows or columns (`B | n/s`, `B | n/t`).
    pub fn new(
        grid: GridSpec,
        groups: (usize, usize),
        n: usize,
        block: usize,
        outer_block: usize,
        alg: BroadcastAlg,
        params: HockneyParams,
    ) -> Result<Self> {
        let grouped = make_grouped_grid(grid, groups.0, groups.1)?;
        let cfg = Self {
            grouped,
            n,
            block,
            outer_block,
            alg,
            params,
            seed: 0,
            record_trace: false,
            fault: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_trace(self, record_trace: bool) -> Self {
        Self {
            record_trace,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let layout = self.layout()?;
        if self.outer_block == 0 {
            return Err(Error::ZeroExtent {
                what: "outer block size",
            });
        }
        if self.outer_block % self.block != 0 {
            return Err(Error::Divisibility {
                what: "B",
                value: self.outer_block as u64,
                divisor: self.block as u64,
            });
        }
        for (what, extent) in [("n/s", layout.tile_rows()), ("n/t", layout.tile_cols())] {
            if extent % self.outer_block != 0 {
                return Err(Error::Divisibility {
                    what,
                    value: extent as u64,
                    divisor: self.outer_block as u64,
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        self.grouped.base()
    }

    /// Shared layout of `A`, `B` and `C`.
    pub fn layout(&self) -> Result<BlockLayout> {
        BlockLayout::new(self.n, self.block, self.grid())
    }

    /// Seeded uniform `[-1, 1]` inputs, already distributed.
    pub fn random_inputs(&self) -> Result<(DistMatrix, DistMatrix)> {
        let (a, b) = self.random_globals();
        let layout = self.layout()?;
        Ok((scatter_matrix(&a, layout)?, scatter_matrix(&b, layout)?))
    }

    /// The undistributed inputs behind [`SimConfig::random_inputs`].
    pub fn random_globals(&self) -> (Matrix, Matrix) {
        let a = Matrix::random(self.n, self.n, self.seed);
        let b = Matrix::random(self.n, self.n, self.seed ^ 0x9E37_79B9_7F4A_7C15);
        (a, b)
    }

    fn check_operand(&self, m: &DistMatrix, name: &str) -> Result<()> {
        let want = self.layout()?;
        let got = m.layout();
        if got.n() != want.n() || got.grid() != want.grid() {
            return Err(Error::DimensionMismatch {
                expected: format!(
                    "{name}: {n}x{n} on a {}x{} grid",
                    want.grid().rows(),
                    want.grid().cols(),
                    n = want.n()
                ),
                actual: format!(
                    "{name}: {n}x{n} on a {}x{} grid",
                    got.grid().rows(),
                    got.grid().cols(),
                    n = got.n()
                ),
            });
        }
        Ok(())
    }
}

/// Timing and traffic of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub algorithm: &'static str,
    pub n: usize,
    pub grid: (usize, usize),
    pub groups: (usize, usize),
    pub block: usize,
    pub outer_block: usize,
    pub alg: BroadcastAlg,
    pub params: HockneyParams,
    /// Latest rank clock at the end of the run.
    pub makespan_s: f64,
    /// Largest per-rank time spent inside broadcasts, waiting included.
    pub comm_time_s: f64,
    /// Largest per-rank local-update time.
    pub compute_time_s: f64,
    /// `comm_time_s` of the same run with `beta = gamma = 0`.
    pub latency_s: f64,
    /// `comm_time_s` of the same run with `alpha = gamma = 0`.
    pub bandwidth_s: f64,
    pub msg_count: u64,
    pub volume_elems: u64,
    /// Broadcasts inside groups.
    pub inner: LevelMetrics,
    /// Broadcasts between groups.
    pub outer: LevelMetrics,
    /// Local updates performed by each rank.
    pub local_updates: usize,
    pub steps: Vec<StepMetrics>,
    pub trace: Vec<MessageRecord>,
}

impl SimMetrics {
    pub fn group_count(&self) -> usize {
        self.groups.0 * self.groups.1
    }

    pub fn procs(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    /// True when both runs sent the same messages at the same times and
    /// ended with identical totals, ignoring which hierarchy level each
    /// message was attributed to.
    pub fn same_events_as(&self, other: &SimMetrics) -> bool {
        let strip = |t: &[MessageRecord]| -> Vec<(usize, usize, usize, u64, u64)> {
            t.iter()
                .map(|m| (m.from, m.to, m.elems, m.start_s.to_bits(), m.end_s.to_bits()))
                .collect()
        };
        self.makespan_s == other.makespan_s
            && self.comm_time_s == other.comm_time_s
            && self.compute_time_s == other.compute_time_s
            && self.msg_count == other.msg_count
            && self.volume_elems == other.volume_elems
            && self.steps == other.steps
            && strip(&self.trace) == strip(&other.trace)
    }
}

/// Sequential `A * B` with the `k` loop innermost and all loops ascending.
pub fn reference_multiply(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: "two square matrices of equal size".into(),
            actual: format!("{}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        });
    }
    let n = a.rows();
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = acc;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn reference_small_cases() {
        let i4 = Matrix::identity(4);
        assert_eq!(reference_multiply(&i4, &i4).unwrap(), i4);
        let c = reference_multiply(&Matrix::from_vec(1, 1, vec![2.0]), &Matrix::from_vec(1, 1, vec![3.0])).unwrap();
        assert_eq!(c.as_slice(), &[6.0]);
        assert!(reference_multiply(&Matrix::zeros(2, 3), &Matrix::zeros(3, 2)).is_err());
        assert!(reference_multiply(&Matrix::zeros(2, 2), &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn reference_transpose_identity() {
        let a = Matrix::random(8, 8, 11);
        let b = Matrix::random(8, 8, 12);
        let lhs = reference_multiply(&a, &b).unwrap().transpose();
        let rhs = reference_multiply(&b.transpose(), &a.transpose()).unwrap();
        assert!(lhs.relative_error(&rhs) < 1e-15);
    }

    #[test]
    fn config_divisibility() {
        let p = HockneyParams::new(1.0, 1.0, 0.0).unwrap();
        let g = make_grid(4, 4).unwrap();
        let alg = BroadcastAlg::BinomialTree;
        assert!(SimConfig::new(g, (2, 2), 16, 2, 4, alg, p).is_ok());
        assert!(matches!(SimConfig::new(g, (2, 2), 16, 4, 2, alg, p), Err(Error::Divisibility { what: "B", .. })));
        assert!(matches!(SimConfig::new(g, (2, 2), 16, 2, 8, alg, p), Err(Error::Divisibility { what: "n/s", .. })));
        assert!(SimConfig::new(g, (3, 2), 16, 2, 4, alg, p).is_err());
        assert!(SimConfig::new(g, (2, 2), 18, 2, 4, alg, p).is_err());
    }
}
