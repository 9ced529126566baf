//! Platform presets, parameter sweeps, CSV reports and the command line.
//!
//! Every table shares one schema: the swept key (`NB_groups` or `NB_procs`),
//! then `overall_comm,time_mean,latency_s,bandwidth_s,compute_s,source`, then
//! any command-specific columns. Parameters are echoed as leading `#` lines.
//! `time_mean` is the single deterministic run (or the model's total).

pub mod cli;
pub mod config;
pub mod csv;
pub mod preset;
pub mod simulate;
pub mod sweep;
pub mod validate;

pub use csv::{Source, SweepKey, SweepResult, SweepRow};
pub use preset::{PlatformPreset, PresetChoice, BGP, EXASCALE, GRID5000, PRESETS};
pub use simulate::{simulate, SimulationOutcome, Verdict};
pub use sweep::{
    admissible_groups, pick_groups, predict_exascale, simulate_groups, simulate_summa, sweep_groups,
    sweep_procs, DeskGuard, GroupRule, Mode, Setup,
};
pub use validate::{run_validation, Check, Status, ValidateOptions, ValidationReport};
