//! SUMMA and hierarchical SUMMA (HSUMMA) on a simulated 2D processor grid.
//!
//! The crate has four layers:
//!
//! - [`grid`]: processor-grid geometry, the two-level `I x J` grouping and
//!   block-checkerboard distribution of dense matrices.
//! - [`broadcast`]: explicit point-to-point broadcast schedules (flat,
//!   binomial tree, Van de Geijn scatter + ring allgather) replayed against
//!   per-rank clocks under the Hockney `alpha + m * beta` model.
//! - [`cost`]: closed-form communication costs of SUMMA and HSUMMA, the
//!   extremum analysis in the group count `G`, and optimal-`G` search.
//! - [`sim`]: step-accurate execution of both algorithms with real local
//!   block products and simulated timing.
//!
//! [`experiment`] ties them together into platform presets, sweeps and CSV
//! reports; the `hsumma` binary is a thin command-line front end over it.

pub mod broadcast;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod matrix;
pub mod sim;

pub use broadcast::{
    make_schedule, simulate_schedule, BroadcastAlg, BroadcastSchedule, ClockState, SendEvent,
};
pub use cost::{
    hsumma_comm_cost, hsumma_cost_derivative, hsumma_cost_derivative_sign, optimal_groups,
    predict_execution, regime_check, summa_comm_cost, BcastCostModel, CostBreakdown,
    HockneyParams, ModelProblem, Regime,
};
pub use error::{Error, Result};
pub use grid::{
    gather_matrix, make_grid, make_grouped_grid, scatter_matrix, BlockLayout, DistMatrix,
    GridCoord, GridSpec, GroupedCoord, GroupedGridSpec,
};
pub use matrix::Matrix;
pub use sim::{
    measured_vs_model, reference_multiply, run_hsumma, run_summa, SimConfig, SimMetrics,
};
