use std::rc::Rc;

use super::timeline::{Level, Timeline, TimelineSummary};
use super::{Fault, SimConfig, SimMetrics};
use crate::cost::HockneyParams;
use crate::error::Result;
use crate::grid::{DistMatrix, GridCoord, GroupedCoord, GroupedGridSpec};
use crate::matrix::Matrix;

/// Per-rank buffers of a numerical run.
struct Operands<'a> {
    a: &'a DistMatrix,
    b: &'a DistMatrix,
    c: DistMatrix,
    a_panel: Vec<Option<Rc<Matrix>>>,
    b_panel: Vec<Option<Rc<Matrix>>>,
    a_outer: Vec<Option<Rc<Matrix>>>,
    b_outer: Vec<Option<Rc<Matrix>>>,
}

impl<'a> Operands<'a> {
    fn new(a: &'a DistMatrix, b: &'a DistMatrix) -> Self {
        let p = a.layout().grid().size();
        Self {
            a,
            b,
            c: DistMatrix::zeros(a.layout()),
            a_panel: vec![None; p],
            b_panel: vec![None; p],
            a_outer: vec![None; p],
            b_outer: vec![None; p],
        }
    }

    fn update(&mut self, rank: usize) {
        let a = self.a_panel[rank].as_ref().expect("A panel delivered before update");
        let b = self.b_panel[rank].as_ref().expect("B panel delivered before update");
        self.c.tile_mut(rank).gemm_acc(a, b);
    }
}

fn deliver(slots: &mut [Option<Rc<Matrix>>], ranks: &[usize], panel: &Rc<Matrix>) {
    for &r in ranks {
        slots[r] = Some(Rc::clone(panel));
    }
}

/// Index of the pivot row of `B` used at `step` out of `steps`.
fn b_pivot_step(cfg: &SimConfig, step: usize, steps: usize) -> usize {
    match cfg.fault {
        Some(Fault::PivotOffByOne) => (step + 1) % steps,
        None => step,
    }
}

/// SUMMA: `n/b` steps, each a row broadcast of the pivot column panel of `A`,
/// a column broadcast of the pivot row panel of `B` and a local update.
///
/// Any grouping in `cfg` is ignored.
pub fn run_summa(a: &DistMatrix, b: &DistMatrix, cfg: &SimConfig) -> Result<(DistMatrix, SimMetrics)> {
    cfg.validate()?;
    cfg.check_operand(a, "A")?;
    cfg.check_operand(b, "B")?;
    let mut ops = Operands::new(a, b);
    let main = summa_pass(cfg, cfg.params, cfg.record_trace, Some(&mut ops))?;
    let latency = summa_pass(cfg, latency_only(&cfg.params), false, None)?;
    let bandwidth = summa_pass(cfg, bandwidth_only(&cfg.params), false, None)?;
    let single = GroupedGridSpec::single(cfg.grid());
    let metrics = assemble("summa", cfg, single, cfg.block, main, &latency, &bandwidth);
    Ok((ops.c, metrics))
}

/// HSUMMA: `n/B` outer steps, each broadcasting width-`B` panels between the
/// homologous ranks of different groups, followed by `B/b` SUMMA steps inside
/// every group on width-`b` slices of the received outer panels.
pub fn run_hsumma(a: &DistMatrix, b: &DistMatrix, cfg: &SimConfig) -> Result<(DistMatrix, SimMetrics)> {
    cfg.validate()?;
    cfg.check_operand(a, "A")?;
    cfg.check_operand(b, "B")?;
    let mut ops = Operands::new(a, b);
    let main = hsumma_pass(cfg, cfg.params, cfg.record_trace, Some(&mut ops))?;
    let latency = hsumma_pass(cfg, latency_only(&cfg.params), false, None)?;
    let bandwidth = hsumma_pass(cfg, bandwidth_only(&cfg.params), false, None)?;
    let metrics = assemble("hsumma", cfg, cfg.grouped, cfg.outer_block, main, &latency, &bandwidth);
    Ok((ops.c, metrics))
}

fn latency_only(p: &HockneyParams) -> HockneyParams {
    HockneyParams {
        alpha: p.alpha,
        beta: 0.0,
        gamma: 0.0,
    }
}

fn bandwidth_only(p: &HockneyParams) -> HockneyParams {
    HockneyParams {
        alpha: 0.0,
        beta: p.beta,
        gamma: 0.0,
    }
}

fn assemble(
    algorithm: &'static str,
    cfg: &SimConfig,
    grouped: GroupedGridSpec,
    outer_block: usize,
    main: TimelineSummary,
    latency: &TimelineSummary,
    bandwidth: &TimelineSummary,
) -> SimMetrics {
    let grid = cfg.grid();
    SimMetrics {
        algorithm,
        n: cfg.n,
        grid: (grid.rows(), grid.cols()),
        groups: (grouped.group_rows(), grouped.group_cols()),
        block: cfg.block,
        outer_block,
        alg: cfg.alg,
        params: cfg.params,
        makespan_s: main.makespan_s,
        comm_time_s: main.comm_time_s,
        compute_time_s: main.compute_time_s,
        latency_s: latency.comm_time_s,
        bandwidth_s: bandwidth.comm_time_s,
        msg_count: main.inner.msg_count + main.outer.msg_count,
        volume_elems: main.inner.volume_elems + main.outer.volume_elems,
        inner: main.inner,
        outer: main.outer,
        local_updates: main.steps.len(),
        steps: main.steps,
        trace: main.trace,
    }
}

fn summa_pass(
    cfg: &SimConfig,
    params: HockneyParams,
    trace: bool,
    mut data: Option<&mut Operands<'_>>,
) -> Result<TimelineSummary> {
    let grid = cfg.grid();
    let layout = cfg.layout()?;
    let (tr, tc) = (layout.tile_rows(), layout.tile_cols());
    let b = cfg.block;
    let steps = cfg.n / b;
    let mut tl = Timeline::new(grid.size(), cfg.alg, params, trace);

    for step in 0..steps {
        // Pivot column panel of A lives in processor column `owner_col`.
        let col = step * b;
        let (owner_col, col_off) = (col / tc, col % tc);
        for row in 0..grid.rows() {
            let root = grid.rank_of(GridCoord { row, col: owner_col });
            let members = grid.row_ranks(row);
            tl.broadcast(Level::Inner, root, &members, tr * b)?;
            if let Some(d) = data.as_deref_mut() {
                let panel = Rc::new(d.a.tile(root).block(0, col_off, tr, b));
                deliver(&mut d.a_panel, &members, &panel);
            }
        }

        let row = b_pivot_step(cfg, step, steps) * b;
        let (owner_row, row_off) = (row / tr, row % tr);
        for col in 0..grid.cols() {
            let root = grid.rank_of(GridCoord { row: owner_row, col });
            let members = grid.col_ranks(col);
            tl.broadcast(Level::Inner, root, &members, b * tc)?;
            if let Some(d) = data.as_deref_mut() {
                let panel = Rc::new(d.b.tile(root).block(row_off, 0, b, tc));
                deliver(&mut d.b_panel, &members, &panel);
            }
        }

        for rank in 0..grid.size() {
            tl.compute(rank, tr * tc * b);
            if let Some(d) = data.as_deref_mut() {
                d.update(rank);
            }
        }
        tl.end_step();
    }
    Ok(tl.finish())
}

fn hsumma_pass(
    cfg: &SimConfig,
    params: HockneyParams,
    trace: bool,
    mut data: Option<&mut Operands<'_>>,
) -> Result<TimelineSummary> {
    let gg = cfg.grouped;
    let grid = gg.base();
    let layout = cfg.layout()?;
    let (tr, tc) = (layout.tile_rows(), layout.tile_cols());
    let (b, outer) = (cfg.block, cfg.outer_block);
    let outer_steps = cfg.n / outer;
    let inner_steps = outer / b;
    let mut tl = Timeline::new(grid.size(), cfg.alg, params, trace);

    for k in 0..outer_steps {
        // Outer panel of A: processor column `a_col`, i.e. group column
        // `a_col / (t/J)` and inner column `a_col % (t/J)`.
        let col = k * outer;
        let (a_col, a_off) = (col / tc, col % tc);
        let row = b_pivot_step(cfg, k, outer_steps) * outer;
        let (b_row, b_off) = (row / tr, row % tr);

        // Between groups: every owner sends its slice to the homologous
        // ranks P(x,*)(i,j) of the other groups in its processor row.
        for r in 0..grid.rows() {
            let root = grid.rank_of(GridCoord { row: r, col: a_col });
            let members = gg.group_row_comm(root);
            tl.broadcast(Level::Outer, root, &members, tr * outer)?;
            if let Some(d) = data.as_deref_mut() {
                let panel = Rc::new(d.a.tile(root).block(0, a_off, tr, outer));
                deliver(&mut d.a_outer, &members, &panel);
            }
        }
        for c in 0..grid.cols() {
            let root = grid.rank_of(GridCoord { row: b_row, col: c });
            let members = gg.group_col_comm(root);
            tl.broadcast(Level::Outer, root, &members, outer * tc)?;
            if let Some(d) = data.as_deref_mut() {
                let panel = Rc::new(d.b.tile(root).block(b_off, 0, outer, tc));
                deliver(&mut d.b_outer, &members, &panel);
            }
        }

        let a_inner_col = a_col % gg.inner_cols();
        let b_inner_row = b_row % gg.inner_rows();
        for step in 0..inner_steps {
            // Inside each group: rank P(x,y)(i, a_inner_col) slices its outer
            // A block and broadcasts along P(x,y)(i,*).
            for r in 0..grid.rows() {
                for group_col in 0..gg.group_cols() {
                    let root = gg.rank_of(GroupedCoord {
                        group_row: r / gg.inner_rows(),
                        group_col,
                        inner_row: r % gg.inner_rows(),
                        inner_col: a_inner_col,
                    });
                    let members = gg.row_comm(root);
                    tl.broadcast(Level::Inner, root, &members, tr * b)?;
                    if let Some(d) = data.as_deref_mut() {
                        let src = d.a_outer[root].as_ref().expect("outer A block received");
                        let panel = Rc::new(src.block(0, step * b, tr, b));
                        deliver(&mut d.a_panel, &members, &panel);
                    }
                }
            }
            for c in 0..grid.cols() {
                for group_row in 0..gg.group_rows() {
                    let root = gg.rank_of(GroupedCoord {
                        group_row,
                        group_col: c / gg.inner_cols(),
                        inner_row: b_inner_row,
                        inner_col: c % gg.inner_cols(),
                    });
                    let members = gg.col_comm(root);
                    tl.broadcast(Level::Inner, root, &members, b * tc)?;
                    if let Some(d) = data.as_deref_mut() {
                        let src = d.b_outer[root].as_ref().expect("outer B block received");
                        let panel = Rc::new(src.block(step * b, 0, b, tc));
                        deliver(&mut d.b_panel, &members, &panel);
                    }
                }
            }
            for rank in 0..grid.size() {
                tl.compute(rank, tr * tc * b);
                if let Some(d) = data.as_deref_mut() {
                    d.update(rank);
                }
            }
            tl.end_step();
        }
    }
    Ok(tl.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadcast::BroadcastAlg;
    use crate::grid::{gather_matrix, make_grid, scatter_matrix, BlockLayout};
    use crate::sim::reference_multiply;

    fn params() -> HockneyParams {
        HockneyParams::new(1e-4, 1e-9, 1e-10).unwrap()
    }

    fn config(s: usize, groups: (usize, usize), n: usize, b: usize, outer: usize, alg: BroadcastAlg) -> SimConfig {
        SimConfig::new(make_grid(s, s).unwrap(), groups, n, b, outer, alg, params())
            .unwrap()
            .with_seed(7)
    }

    #[test]
    fn identity_times_identity() {
        let cfg = config(2, (1, 1), 8, 2, 2, BroadcastAlg::BinomialTree);
        let layout = cfg.layout().unwrap();
        let id = scatter_matrix(&Matrix::identity(8), layout).unwrap();
        let (c, m) = run_summa(&id, &id, &cfg).unwrap();
        assert_eq!(gather_matrix(&c), Matrix::identity(8));
        // 2 n^3 / p flops at gamma each.
        let want = 2.0 * 512.0 / 4.0 * 1e-10;
        assert!((m.compute_time_s - want).abs() < 1e-22);
        assert_eq!(m.local_updates, 4);
    }

    #[test]
    fn summa_matches_reference() {
        let cfg = config(4, (1, 1), 16, 2, 2, BroadcastAlg::VanDeGeijn);
        let (a, b) = cfg.random_inputs().unwrap();
        let (c, _) = run_summa(&a, &b, &cfg).unwrap();
        let want = reference_multiply(&gather_matrix(&a), &gather_matrix(&b)).unwrap();
        assert!(gather_matrix(&c).relative_error(&want) < 1e-10);
    }

    #[test]
    fn hsumma_matches_reference() {
        let cfg = config(4, (2, 2), 16, 2, 4, BroadcastAlg::BinomialTree);
        let (a, b) = cfg.random_inputs().unwrap();
        let (c, m) = run_hsumma(&a, &b, &cfg).unwrap();
        let want = reference_multiply(&gather_matrix(&a), &gather_matrix(&b)).unwrap();
        assert!(gather_matrix(&c).relative_error(&want) < 1e-10);
        assert_eq!(m.local_updates, 16 / 2);
        assert!(m.outer.msg_count > 0 && m.inner.msg_count > 0);
    }

    #[test]
    fn summa_panel_payloads() {
        let cfg = config(4, (1, 1), 32, 4, 4, BroadcastAlg::BinomialTree).with_trace(true);
        let (a, b) = cfg.random_inputs().unwrap();
        let (_, m) = run_summa(&a, &b, &cfg).unwrap();
        // (n / sqrt p) * b elements per message.
        assert!(m.trace.iter().all(|r| r.elems == 8 * 4));
        // Binomial on 4 ranks: 3 sends per broadcast, 8 broadcasts per step.
        assert_eq!(m.steps[0].msg_count, 24);
    }

    #[test]
    fn rectangular_grid() {
        let p = params();
        let cfg = SimConfig::new(make_grid(2, 4).unwrap(), (2, 2), 16, 2, 4, BroadcastAlg::VanDeGeijn, p)
            .unwrap()
            .with_seed(3);
        let (a, b) = cfg.random_inputs().unwrap();
        let want = reference_multiply(&gather_matrix(&a), &gather_matrix(&b)).unwrap();
        let (c1, _) = run_summa(&a, &b, &cfg).unwrap();
        let (c2, _) = run_hsumma(&a, &b, &cfg).unwrap();
        assert!(gather_matrix(&c1).relative_error(&want) < 1e-10);
        assert!(gather_matrix(&c2).relative_error(&want) < 1e-10);
    }

    #[test]
    fn operand_layout_mismatch() {
        let cfg = config(2, (1, 1), 8, 2, 2, BroadcastAlg::Flat);
        let other = BlockLayout::new(8, 2, make_grid(4, 2).unwrap()).unwrap();
        let a = DistMatrix::zeros(other);
        let (_, b) = cfg.random_inputs().unwrap();
        assert!(run_summa(&a, &b, &cfg).is_err());
        assert!(run_hsumma(&b, &a, &cfg).is_err());
    }

    #[test]
    fn off_by_one_pivot_is_wrong() {
        let mut cfg = config(2, (1, 1), 8, 2, 2, BroadcastAlg::BinomialTree);
        cfg.fault = Some(Fault::PivotOffByOne);
        let (a, b) = cfg.random_inputs().unwrap();
        let want = reference_multiply(&gather_matrix(&a), &gather_matrix(&b)).unwrap();
        let (c, _) = run_summa(&a, &b, &cfg).unwrap();
        assert!(gather_matrix(&c).relative_error(&want) > 1e-3);
        let (c, _) = run_hsumma(&a, &b, &cfg).unwrap();
        assert!(gather_matrix(&c).relative_error(&want) > 1e-3);
    }
}
