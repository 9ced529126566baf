use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is not divisible by {divisor}")]
    Divisibility {
        what: &'static str,
        value: u64,
        divisor: u64,
    },

    #[error("{what} must be at least 1")]
    ZeroExtent { what: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("root rank {root} is not among the broadcast participants")]
    RootNotParticipant { root: usize },

    #[error("rank {rank} appears more than once in the participant list")]
    DuplicateParticipant { rank: usize },

    #[error("event {event} depends on event {dependency}, which does not precede it")]
    DanglingDependency { event: usize, dependency: usize },

    #[error("rank {rank} has no clock entry (clock state covers {len} ranks)")]
    MissingClock { rank: usize, len: usize },

    #[error("event {event}: rank {rank} sends elements {lo}..{hi} it does not hold")]
    SendsUnheldData {
        event: usize,
        rank: usize,
        lo: usize,
        hi: usize,
    },

    #[error("{what} = {value} is not a perfect square")]
    NotSquare { what: &'static str, value: u64 },

    #[error("group count {groups} is outside [1, {procs}]")]
    GroupCountOutOfRange { groups: f64, procs: u64 },

    #[error("group count {groups} is not admissible for p = {procs}: {reason}")]
    InadmissibleGroups {
        groups: u64,
        procs: u64,
        reason: &'static str,
    },

    #[error("inner block size {inner} exceeds outer block size {outer}")]
    InnerBlockTooLarge { inner: u64, outer: u64 },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("negative or non-finite Hockney parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("simulation and model disagree on {field}: {simulated} vs {model}")]
    ParameterMismatch {
        field: &'static str,
        simulated: String,
        model: String,
    },

    #[error("{what} = {value} exceeds the desk-scale limit {limit} (pass --allow-large to override)")]
    GuardExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },
}
