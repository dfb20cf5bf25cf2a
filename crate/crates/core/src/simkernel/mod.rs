//! Event-driven timing simulation of a single trial.
//!
//! Workers run their subtasks back to back at a constant effective rate.
//! Completions and elastic events are processed in time order; a trial ends
//! when the recovery threshold is met (every set for CEC/MLCEC, the global
//! count for BICEC).

mod bicec;
mod sets;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{AllocationMatrix, Scheme, SchemeParams};
use crate::codec::MatrixDims;
use crate::error::{Error, Result};
use crate::verify::CompletionRecord;

pub use bicec::simulate_bicec;
pub use sets::simulate_cec_mlcec;

/// Default multiplicative slowdown applied to stragglers.
pub const DEFAULT_SLOWDOWN: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkerProfile {
    pub id: usize,
    /// Operations per second when not straggling.
    pub base_rate: f64,
    pub is_straggler: bool,
    pub slowdown: f64,
}

impl WorkerProfile {
    pub fn effective_rate(&self) -> f64 {
        if self.is_straggler {
            self.base_rate / self.slowdown
        } else {
            self.base_rate
        }
    }
}

/// Profiles for workers `1..=n_max`, each independently a straggler with
/// probability `straggler_prob`. Deterministic in `seed`.
pub fn sample_profiles(
    n_max: usize,
    base_rate: f64,
    straggler_prob: f64,
    slowdown: f64,
    seed: u64,
) -> Result<Vec<WorkerProfile>> {
    if !(0.0..=1.0).contains(&straggler_prob) {
        return Err(Error::invalid(format!(
            "straggler probability {straggler_prob} outside [0, 1]"
        )));
    }
    if !(slowdown >= 1.0 && slowdown.is_finite()) {
        return Err(Error::invalid(format!("slowdown {slowdown} must be a finite value >= 1")));
    }
    if !(base_rate > 0.0 && base_rate.is_finite()) {
        return Err(Error::invalid(format!("base rate {base_rate} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((1..=n_max)
        .map(|id| WorkerProfile {
            id,
            base_rate,
            is_straggler: rng.random_bool(straggler_prob),
            slowdown,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElasticEventKind {
    Join,
    Leave,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticEvent {
    pub time: f64,
    pub worker: usize,
    pub kind: ElasticEventKind,
}

/// Time-ordered join/leave events.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElasticTimeline {
    events: Vec<ElasticEvent>,
}

impl ElasticTimeline {
    pub fn none() -> Self {
        ElasticTimeline::default()
    }

    pub fn new(events: Vec<ElasticEvent>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| !(e.time >= 0.0 && e.time.is_finite())) {
            return Err(Error::invalid(format!("event time {} is not a finite nonnegative value", e.time)));
        }
        if events.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::invalid("elastic events are not time ordered"));
        }
        Ok(ElasticTimeline { events })
    }

    /// Workers in each group leave together at the paired time.
    pub fn preemptions(groups: &[(f64, Vec<usize>)]) -> Result<Self> {
        let events = groups
            .iter()
            .flat_map(|(time, ids)| {
                ids.iter().map(move |&worker| ElasticEvent {
                    time: *time,
                    worker,
                    kind: ElasticEventKind::Leave,
                })
            })
            .collect();
        ElasticTimeline::new(events)
    }

    pub fn events(&self) -> &[ElasticEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Replays membership from `initial`, checking every event applies to the
    /// right kind of worker and the pool stays within `[n_min, n_max]`.
    pub fn validate(&self, initial: &[usize], n_min: usize, n_max: usize) -> Result<()> {
        let mut active = vec![false; n_max + 1];
        for &id in initial {
            if id == 0 || id > n_max {
                return Err(Error::invalid(format!("worker id {id} outside 1..={n_max}")));
            }
            if std::mem::replace(&mut active[id], true) {
                return Err(Error::invalid(format!("worker {id} listed twice")));
            }
        }
        let in_range = |count: usize| (n_min..=n_max).contains(&count);
        let mut count = initial.len();
        if !in_range(count) {
            return Err(Error::invalid(format!(
                "{count} initial workers outside [{n_min}, {n_max}]"
            )));
        }
        for group in self.groups() {
            for e in group {
                if e.worker == 0 || e.worker > n_max {
                    return Err(Error::invalid(format!("worker id {} outside 1..={n_max}", e.worker)));
                }
                match e.kind {
                    ElasticEventKind::Join if active[e.worker] => {
                        return Err(Error::invalid(format!("worker {} joins while active", e.worker)));
                    }
                    ElasticEventKind::Leave if !active[e.worker] => {
                        return Err(Error::invalid(format!("worker {} leaves while inactive", e.worker)));
                    }
                    ElasticEventKind::Join => {
                        active[e.worker] = true;
                        count += 1;
                    }
                    ElasticEventKind::Leave => {
                        active[e.worker] = false;
                        count -= 1;
                    }
                }
            }
            if !in_range(count) {
                return Err(Error::invalid(format!(
                    "{count} active workers at t={} outside [{n_min}, {n_max}]",
                    group[0].time
                )));
            }
        }
        Ok(())
    }

    /// Events sharing a timestamp, in order.
    pub(crate) fn groups(&self) -> impl Iterator<Item = &[ElasticEvent]> {
        self.events.chunk_by(|a, b| a.time == b.time)
    }
}

/// Multiply-add operations in one subtask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubtaskWork {
    pub ops: f64,
}

impl SubtaskWork {
    /// CEC/MLCEC: each worker's `uwv/K` task cut into `N` pieces.
    pub fn for_sets(dims: &MatrixDims, k: usize, n: usize) -> Self {
        SubtaskWork {
            ops: dims.product_ops() / (k * n) as f64,
        }
    }

    /// BICEC: one encoded row block of `A` (`u/K` rows) times `B`.
    pub fn for_bicec(dims: &MatrixDims, k: usize) -> Self {
        SubtaskWork {
            ops: dims.product_ops() / k as f64,
        }
    }

    pub fn duration(&self, rate: f64) -> f64 {
        self.ops / rate
    }
}

/// Shared inputs for one trial beyond the allocation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialContext {
    pub dims: MatrixDims,
    /// Master throughput used by the decoding-time model (ops/s).
    pub decode_rate: f64,
    /// BICEC only: a leaving worker keeps completing subtasks for this long
    /// after its leave event.
    pub notice_delay: f64,
}

impl TrialContext {
    pub fn new(dims: MatrixDims, decode_rate: f64) -> Self {
        TrialContext {
            dims,
            decode_rate,
            notice_delay: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    pub computation_time: f64,
    pub decoding_time: f64,
    pub finishing_time: f64,
    pub transition_waste_total: usize,
    /// Completed subtasks per worker id (`completed_counts[id - 1]`).
    pub completed_counts: Vec<usize>,
}

/// One elastic transition as seen by the allocator.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRecord {
    pub time: f64,
    pub before: AllocationMatrix,
    /// Leading entries of each `before` row already finished.
    pub completed: Vec<usize>,
    pub after: AllocationMatrix,
    pub waste: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub metrics: TrialMetrics,
    pub completion: CompletionRecord,
    pub transitions: Vec<TransitionRecord>,
    /// Active workers when the threshold was met.
    pub final_n: usize,
}

/// Runs the scheme named by `params.scheme`.
pub fn simulate(
    params: &SchemeParams,
    initial_workers: &[usize],
    profiles: &[WorkerProfile],
    timeline: &ElasticTimeline,
    ctx: &TrialContext,
) -> Result<TrialOutcome> {
    match params.scheme {
        Scheme::Cec | Scheme::Mlcec => {
            simulate_cec_mlcec(params, initial_workers, profiles, timeline, ctx)
        }
        Scheme::Bicec => simulate_bicec(params, initial_workers, profiles, timeline, ctx),
    }
}

/// `(2/3) k^3`, the multiply-add count of a dense `k x k` solve.
pub fn solve_cost(k: usize) -> f64 {
    2.0 / 3.0 * (k as f64).powi(3)
}

/// Seconds to decode once computation finishes.
///
/// CEC/MLCEC apply a `K x K` inverse to blocks of `u/(K N)` rows:
/// `K u v / N` multiply-adds. BICEC applies a `K x K` inverse to blocks of
/// `u/K` rows: `K u v`. Both add the solve itself.
pub fn decoding_time_model(scheme: Scheme, k: usize, dims: &MatrixDims, n: usize, rate: f64) -> f64 {
    let uv = dims.u as f64 * dims.v as f64;
    let reconstruction = match scheme {
        Scheme::Cec | Scheme::Mlcec => k as f64 * uv / n as f64,
        Scheme::Bicec => k as f64 * uv,
    };
    (reconstruction + solve_cost(k)) / rate
}

pub(crate) fn profile_for(profiles: &[WorkerProfile], id: usize) -> Result<&WorkerProfile> {
    profiles
        .get(id.wrapping_sub(1))
        .filter(|p| p.id == id)
        .ok_or_else(|| Error::invalid(format!("no profile for worker {id}")))
}

/// Min-heap entry: a worker's next completion.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Pending {
    pub time: f64,
    pub worker: usize,
    /// Stream generation; stale entries are skipped when popped.
    pub generation: u64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed so BinaryHeap pops the earliest time, then the lowest id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.worker.cmp(&self.worker))
            .then_with(|| other.generation.cmp(&self.generation))
    }
}
