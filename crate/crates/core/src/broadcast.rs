//! Explicit broadcast schedules and their replay under the Hockney model.
//!
//! A schedule is a list of point-to-point sends. Each send carries a
//! contiguous element range of the `m`-element message, so the replay can
//! check that nobody forwards data it has not received yet.
//!
//! Replay treats a broadcast as one blocking collective call per rank: a
//! rank enters at its current clock, may have one send and one receive in
//! flight at a time while inside the collective, and leaves when its last
//! send or receive completes. A send occupies both endpoints for
//! `alpha + size * beta`.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::cost::{BcastCostModel, HockneyParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BroadcastAlg {
    /// Root sends the whole message to every other participant in turn.
    Flat,
    /// Doubling tree: `ceil(log2 q)` rounds of full-message sends.
    BinomialTree,
    /// Binomial scatter of `q` chunks followed by a ring allgather.
    VanDeGeijn,
}

impl BroadcastAlg {
    pub const ALL: [BroadcastAlg; 3] = [Self::Flat, Self::BinomialTree, Self::VanDeGeijn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::BinomialTree => "binomial",
            Self::VanDeGeijn => "van-de-geijn",
        }
    }

    /// The `L(q)`, `W(q)` pair whose closed form this schedule realizes.
    pub fn cost_model(self) -> BcastCostModel {
        match self {
            Self::Flat => BcastCostModel::Flat,
            Self::BinomialTree => BcastCostModel::Binomial,
            Self::VanDeGeijn => BcastCostModel::VanDeGeijn,
        }
    }

    /// Closed-form time of one broadcast of `m` elements among `q` ranks.
    pub fn closed_form(self, q: usize, m: usize, params: &HockneyParams) -> f64 {
        self.cost_model().broadcast_time(q as f64, m as f64, params)
    }
}

impl fmt::Display for BroadcastAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BroadcastAlg {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, String> {
        let compact: String = raw
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect();
        match compact.as_str() {
            "flat" | "linear" => Ok(Self::Flat),
            "binomial" | "binomialtree" | "tree" => Ok(Self::BinomialTree),
            "vandegeijn" | "vdg" | "scatterallgather" => Ok(Self::VanDeGeijn),
            _ => Err(format!(
                "unknown broadcast algorithm {raw:?} (expected flat, binomial or van-de-geijn)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Flat,
    Tree,
    Scatter,
    Allgather,
}

/// One point-to-point send within a broadcast.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SendEvent {
    pub from: usize,
    pub to: usize,
    /// Element range of the broadcast message carried by this send.
    pub range: Range<usize>,
    /// Earlier events that delivered `range` to the sender.
    pub deps: Vec<usize>,
    pub phase: Phase,
    /// Round within the phase, starting at 0.
    pub round: usize,
}

impl SendEvent {
    pub fn size(&self) -> usize {
        self.range.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastSchedule {
    alg: BroadcastAlg,
    participants: Vec<usize>,
    message_len: usize,
    events: Vec<SendEvent>,
}

impl BroadcastSchedule {
    pub fn alg(&self) -> BroadcastAlg {
        self.alg
    }

    pub fn root(&self) -> usize {
        self.participants[0]
    }

    /// Participants in virtual-rank order, root first.
    pub fn participants(&self) -> &[usize] {
        &self.participants
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn events(&self) -> &[SendEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Total elements put on the wire.
    pub fn volume(&self) -> usize {
        self.events.iter().map(SendEvent::size).sum()
    }

    /// Elements received by `rank` over all events, counting duplicates.
    pub fn received_by(&self, rank: usize) -> usize {
        self.events
            .iter()
            .filter(|e| e.to == rank)
            .map(SendEvent::size)
            .sum()
    }

    /// Checks that every send forwards only data its sender already holds,
    /// that dependencies point backwards, and that every participant ends up
    /// holding exactly the elements `0..m`.
    pub fn validate(&self) -> Result<()> {
        let m = self.message_len;
        let index: std::collections::HashMap<usize, usize> = self
            .participants
            .iter()
            .enumerate()
            .map(|(v, &r)| (r, v))
            .collect();
        let mut held: Vec<Intervals> = vec![Intervals::default(); self.participants.len()];
        held[0].insert(0..m);
        for (i, e) in self.events.iter().enumerate() {
            if let Some(&d) = e.deps.iter().find(|&&d| d >= i) {
                return Err(Error::DanglingDependency {
                    event: i,
                    dependency: d,
                });
            }
            let (Some(&src), Some(&dst)) = (index.get(&e.from), index.get(&e.to)) else {
                return Err(Error::MissingClock {
                    rank: if index.contains_key(&e.from) { e.to } else { e.from },
                    len: self.participants.len(),
                });
            };
            if !held[src].contains(&e.range) || e.range.end > m {
                return Err(Error::SendsUnheldData {
                    event: i,
                    rank: e.from,
                    lo: e.range.start,
                    hi: e.range.end,
                });
            }
            held[dst].insert(e.range.clone());
        }
        for (v, h) in held.iter().enumerate() {
            if !h.is_exactly(0..m) {
                return Err(Error::SendsUnheldData {
                    event: self.events.len(),
                    rank: self.participants[v],
                    lo: 0,
                    hi: m,
                });
            }
        }
        Ok(())
    }
}

/// Builds the send schedule of one broadcast of `m` elements from `root`.
///
/// Participants keep their cyclic order, rotated so `root` is virtual rank 0.
pub fn make_schedule(
    alg: BroadcastAlg,
    root: usize,
    participants: &[usize],
    m: usize,
) -> Result<BroadcastSchedule> {
    let mut seen = HashSet::with_capacity(participants.len());
    for &r in participants {
        if !seen.insert(r) {
            return Err(Error::DuplicateParticipant { rank: r });
        }
    }
    let pos = participants
        .iter()
        .position(|&r| r == root)
        .ok_or(Error::RootNotParticipant { root })?;
    let q = participants.len();
    let order: Vec<usize> = (0..q).map(|v| participants[(pos + v) % q]).collect();

    let vevents = match alg {
        _ if q == 1 => Vec::new(),
        BroadcastAlg::Flat => flat(q, m),
        BroadcastAlg::BinomialTree => binomial(q, m),
        BroadcastAlg::VanDeGeijn => scatter_allgather(q, m),
    };
    let events = vevents
        .into_iter()
        .map(|e| SendEvent {
            from: order[e.from],
            to: order[e.to],
            ..e
        })
        .collect();
    Ok(BroadcastSchedule {
        alg,
        participants: order,
        message_len: m,
        events,
    })
}

// The generators below work on virtual ranks 0..q with the root at 0.

fn flat(q: usize, m: usize) -> Vec<SendEvent> {
    (1..q)
        .map(|to| SendEvent {
            from: 0,
            to,
            range: 0..m,
            deps: Vec::new(),
            phase: Phase::Flat,
            round: to - 1,
        })
        .collect()
}

fn binomial(q: usize, m: usize) -> Vec<SendEvent> {
    let mut events = Vec::new();
    // Event that delivered the message to each virtual rank.
    let mut delivered: Vec<Option<usize>> = vec![None; q];
    let mut span = 1;
    let mut round = 0;
    while span < q {
        for from in 0..span {
            let to = from + span;
            if to >= q {
                break;
            }
            delivered[to] = Some(events.len());
            events.push(SendEvent {
                from,
                to,
                range: 0..m,
                deps: delivered[from].into_iter().collect(),
                phase: Phase::Tree,
                round,
            });
        }
        span *= 2;
        round += 1;
    }
    events
}

/// Chunk `i` of `m` elements split into `q` pieces differing by at most one.
fn chunk(m: usize, q: usize, i: usize) -> Range<usize> {
    let base = m / q;
    let extra = m % q;
    let start = i * base + i.min(extra);
    let len = base + usize::from(i < extra);
    start..start + len
}

fn chunks(m: usize, q: usize, lo: usize, hi: usize) -> Range<usize> {
    chunk(m, q, lo).start..chunk(m, q, hi - 1).end
}

fn scatter_allgather(q: usize, m: usize) -> Vec<SendEvent> {
    let mut events = Vec::new();
    // Event that delivered chunk c to virtual rank v, per (v, c).
    let mut delivered: Vec<Vec<Option<usize>>> = vec![vec![None; q]; q];

    // Binomial scatter: recursive halving of the chunk range from the root.
    let mut mask = q.next_power_of_two() / 2;
    let mut round = 0;
    while mask > 0 {
        for from in (0..q).step_by(2 * mask) {
            let to = from + mask;
            if to >= q {
                continue;
            }
            let hi = (to + mask).min(q);
            let dep = delivered[from][to];
            let id = events.len();
            events.push(SendEvent {
                from,
                to,
                range: chunks(m, q, to, hi),
                deps: dep.into_iter().collect(),
                phase: Phase::Scatter,
                round,
            });
            for c in to..hi {
                delivered[to][c] = Some(id);
            }
        }
        mask /= 2;
        round += 1;
    }

    // Ring allgather: at step s, rank v forwards chunk (v - s) mod q to v + 1.
    for step in 0..q - 1 {
        let mut arrivals = Vec::with_capacity(q);
        for from in 0..q {
            let c = (from + q - step) % q;
            let to = (from + 1) % q;
            let id = events.len();
            events.push(SendEvent {
                from,
                to,
                range: chunk(m, q, c),
                deps: delivered[from][c].into_iter().collect(),
                phase: Phase::Allgather,
                round: step,
            });
            arrivals.push((to, c, id));
        }
        for (to, c, id) in arrivals {
            if delivered[to][c].is_none() && to != 0 {
                delivered[to][c] = Some(id);
            }
        }
    }
    events
}

/// Simulated time per rank, indexed by global rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockState {
    times: Vec<f64>,
}

impl ClockState {
    pub fn zeros(ranks: usize) -> Self {
        Self {
            times: vec![0.0; ranks],
        }
    }

    pub fn from_times(times: Vec<f64>) -> Self {
        Self { times }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, rank: usize) -> f64 {
        self.times[rank]
    }

    pub fn set(&mut self, rank: usize, t: f64) {
        debug_assert!(t >= self.times[rank], "clocks never run backwards");
        self.times[rank] = t;
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Latest clock across all ranks.
    pub fn makespan(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    /// Element-wise maximum, for merging replays of disjoint broadcasts.
    pub fn merge_max(&mut self, other: &ClockState) {
        for (a, &b) in self.times.iter_mut().zip(&other.times) {
            *a = a.max(b);
        }
    }
}

/// Per-event timing produced by [`replay`].
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub clocks: ClockState,
    pub event_start: Vec<f64>,
    pub event_end: Vec<f64>,
}

/// Replays `sched` from `clocks` and returns the clocks after every
/// participant has left the collective.
pub fn simulate_schedule(
    sched: &BroadcastSchedule,
    params: &HockneyParams,
    clocks: &ClockState,
) -> Result<ClockState> {
    replay(sched, params, clocks).map(|r| r.clocks)
}

/// Like [`simulate_schedule`] but also reports when each send ran.
pub fn replay(
    sched: &BroadcastSchedule,
    params: &HockneyParams,
    clocks: &ClockState,
) -> Result<Replay> {
    let mut out = clocks.clone();
    let (event_start, event_end) = replay_in_place(sched, params, &mut out)?;
    Ok(Replay {
        clocks: out,
        event_start,
        event_end,
    })
}

/// Replays `sched`, advancing only the participants' entries of `clocks`.
/// Returns per-event start and end times. On error `clocks` is untouched.
pub(crate) fn replay_in_place(
    sched: &BroadcastSchedule,
    params: &HockneyParams,
    clocks: &mut ClockState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let q = sched.participants.len();
    let mut slot = std::collections::HashMap::with_capacity(q);
    for (v, &r) in sched.participants.iter().enumerate() {
        if r >= clocks.len() {
            return Err(Error::MissingClock {
                rank: r,
                len: clocks.len(),
            });
        }
        slot.insert(r, v);
    }
    let entry: Vec<f64> = sched.participants.iter().map(|&r| clocks.times[r]).collect();
    let mut send_free = entry.clone();
    let mut recv_free = entry;
    let mut start = Vec::with_capacity(sched.events.len());
    let mut end: Vec<f64> = Vec::with_capacity(sched.events.len());
    for (i, e) in sched.events.iter().enumerate() {
        let (src, dst) = match (slot.get(&e.from), slot.get(&e.to)) {
            (Some(&s), Some(&d)) => (s, d),
            (None, _) => return Err(Error::MissingClock { rank: e.from, len: q }),
            (_, None) => return Err(Error::MissingClock { rank: e.to, len: q }),
        };
        let mut t = send_free[src].max(recv_free[dst]);
        for &d in &e.deps {
            if d >= i {
                return Err(Error::DanglingDependency {
                    event: i,
                    dependency: d,
                });
            }
            t = t.max(end[d]);
        }
        let done = t + params.message_time(e.size() as f64);
        send_free[src] = done;
        recv_free[dst] = done;
        start.push(t);
        end.push(done);
    }
    for (v, &r) in sched.participants.iter().enumerate() {
        let t = &mut clocks.times[r];
        *t = t.max(send_free[v]).max(recv_free[v]);
    }
    Ok((start, end))
}

/// Sorted, disjoint, non-adjacent half-open ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Intervals(Vec<Range<usize>>);

impl Intervals {
    fn insert(&mut self, r: Range<usize>) {
        if r.is_empty() {
            return;
        }
        let mut merged = r;
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for cur in self.0.drain(..) {
            if cur.end < merged.start || cur.start > merged.end {
                out.push(cur);
            } else {
                merged = merged.start.min(cur.start)..merged.end.max(cur.end);
            }
        }
        out.push(merged);
        out.sort_by_key(|r| r.start);
        self.0 = out;
    }

    fn contains(&self, r: &Range<usize>) -> bool {
        r.is_empty() || self.0.iter().any(|c| c.start <= r.start && r.end <= c.end)
    }

    fn is_exactly(&self, r: Range<usize>) -> bool {
        if r.is_empty() {
            self.0.is_empty()
        } else {
            self.0 == [r]
        }
    }
}
