use crate::broadcast::{make_schedule, replay_in_place, BroadcastAlg, ClockState};
use crate::cost::HockneyParams;
use crate::error::Result;

/// Hierarchy level a broadcast belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Inside a group (all SUMMA traffic).
    Inner,
    /// Between homologous ranks of different groups.
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageRecord {
    pub step: usize,
    pub level: Level,
    pub from: usize,
    pub to: usize,
    pub elems: usize,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelMetrics {
    /// Largest per-rank time spent in broadcasts of this level.
    pub comm_time_s: f64,
    pub msg_count: u64,
    pub volume_elems: u64,
}

/// Traffic of one local-update step (including any between-group traffic
/// issued right before it).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepMetrics {
    pub msg_count: u64,
    pub volume_elems: u64,
    /// Latest rank clock once the step's local updates are done.
    pub finish_s: f64,
}

pub(crate) struct Timeline {
    alg: BroadcastAlg,
    params: HockneyParams,
    clocks: ClockState,
    comm: [Vec<f64>; 2],
    compute: Vec<f64>,
    levels: [LevelMetrics; 2],
    steps: Vec<StepMetrics>,
    current: StepMetrics,
    trace: Option<Vec<MessageRecord>>,
}

pub(crate) struct TimelineSummary {
    pub makespan_s: f64,
    pub comm_time_s: f64,
    pub compute_time_s: f64,
    pub inner: LevelMetrics,
    pub outer: LevelMetrics,
    pub steps: Vec<StepMetrics>,
    pub trace: Vec<MessageRecord>,
}

fn slot(level: Level) -> usize {
    match level {
        Level::Inner => 0,
        Level::Outer => 1,
    }
}

impl Timeline {
    pub fn new(ranks: usize, alg: BroadcastAlg, params: HockneyParams, trace: bool) -> Self {
        Self {
            alg,
            params,
            clocks: ClockState::zeros(ranks),
            comm: [vec![0.0; ranks], vec![0.0; ranks]],
            compute: vec![0.0; ranks],
            levels: [LevelMetrics::default(); 2],
            steps: Vec::new(),
            current: StepMetrics::default(),
            trace: trace.then(Vec::new),
        }
    }

    /// Replays one broadcast of `elems` elements. Single-rank communicators
    /// cost nothing and are skipped.
    pub fn broadcast(
        &mut self,
        level: Level,
        root: usize,
        participants: &[usize],
        elems: usize,
    ) -> Result<()> {
        if participants.len() < 2 {
            return Ok(());
        }
        let sched = make_schedule(self.alg, root, participants, elems)?;
        let entry: Vec<f64> = participants.iter().map(|&r| self.clocks.get(r)).collect();
        let (start, end) = replay_in_place(&sched, &self.params, &mut self.clocks)?;
        let k = slot(level);
        for (&r, t0) in participants.iter().zip(entry) {
            self.comm[k][r] += self.clocks.get(r) - t0;
        }
        let msgs = sched.events().len() as u64;
        let volume = sched.volume() as u64;
        self.levels[k].msg_count += msgs;
        self.levels[k].volume_elems += volume;
        self.current.msg_count += msgs;
        self.current.volume_elems += volume;
        if let Some(trace) = self.trace.as_mut() {
            let step = self.steps.len();
            for ((e, s), t) in sched.events().iter().zip(start).zip(end) {
                trace.push(MessageRecord {
                    step,
                    level,
                    from: e.from,
                    to: e.to,
                    elems: e.size(),
                    start_s: s,
                    end_s: t,
                });
            }
        }
        Ok(())
    }

    /// Charges `pairs` multiply-add pairs to `rank` at two flops each.
    pub fn compute(&mut self, rank: usize, pairs: usize) {
        let t = 2.0 * pairs as f64 * self.params.gamma;
        self.clocks.set(rank, self.clocks.get(rank) + t);
        self.compute[rank] += t;
    }

    pub fn end_step(&mut self) {
        self.current.finish_s = self.clocks.makespan();
        self.steps.push(std::mem::take(&mut self.current));
    }

    pub fn finish(mut self) -> TimelineSummary {
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        self.levels[0].comm_time_s = max(&self.comm[0]);
        self.levels[1].comm_time_s = max(&self.comm[1]);
        let total: Vec<f64> = self.comm[0].iter().zip(&self.comm[1]).map(|(a, b)| a + b).collect();
        TimelineSummary {
            makespan_s: self.clocks.makespan(),
            comm_time_s: max(&total),
            compute_time_s: max(&self.compute),
            inner: self.levels[0],
            outer: self.levels[1],
            steps: self.steps,
            trace: self.trace.unwrap_or_default(),
        }
    }
}
