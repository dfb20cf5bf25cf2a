use std::collections::BinaryHeap;

use super::{
    decoding_time_model, profile_for, ElasticEventKind, ElasticTimeline, Pending, SubtaskWork,
    TrialContext, TrialMetrics, TrialOutcome, TransitionRecord, WorkerProfile,
};
use crate::allocation::{allocate, transition_waste, AllocationMatrix, Scheme, SchemeParams};
use crate::error::{Error, Result};
use crate::verify::CompletionRecord;

/// State between two changes of the active worker count.
struct Epoch {
    n: usize,
    alloc: AllocationMatrix,
    /// Worker ids that finished each set, in completion order.
    holders: Vec<Vec<usize>>,
    recovered: usize,
    /// Per allocation row: entries processed (finished or skipped).
    cursor: Vec<usize>,
    /// Per allocation row: subtasks computed since `start`.
    computed: Vec<usize>,
    start: f64,
    durations: Vec<f64>,
    heap: BinaryHeap<Pending>,
}

impl Epoch {
    fn begin(
        alloc: AllocationMatrix,
        holders: Vec<Vec<usize>>,
        k: usize,
        start: f64,
        profiles: &[WorkerProfile],
        ctx: &TrialContext,
    ) -> Result<Self> {
        let n = alloc.n();
        let work = SubtaskWork::for_sets(&ctx.dims, k, n);
        let durations = alloc
            .workers()
            .iter()
            .map(|&id| Ok(work.duration(profile_for(profiles, id)?.effective_rate())))
            .collect::<Result<Vec<_>>>()?;
        let recovered = holders.iter().filter(|h| h.len() >= k).count();
        let mut epoch = Epoch {
            n,
            holders,
            recovered,
            cursor: vec![0; n],
            computed: vec![0; n],
            start,
            durations,
            heap: BinaryHeap::new(),
            alloc,
        };
        for row in 0..n {
            epoch.schedule(row);
        }
        Ok(epoch)
    }

    /// Skips sets this worker already finished and queues the next subtask.
    fn schedule(&mut self, row: usize) {
        let worker = self.alloc.workers()[row];
        let slots = &self.alloc.rows()[row];
        while self.cursor[row] < slots.len()
            && self.holders[slots[self.cursor[row]] - 1].contains(&worker)
        {
            self.cursor[row] += 1;
        }
        if self.cursor[row] < slots.len() {
            self.heap.push(Pending {
                time: self.start + (self.computed[row] + 1) as f64 * self.durations[row],
                worker,
                generation: 0,
            });
        }
    }

    fn row_of(&self, worker: usize) -> usize {
        self.alloc
            .workers()
            .binary_search(&worker)
            .expect("pending worker belongs to the epoch")
    }

    /// Records a completion; true once every set has reached `k`.
    fn complete(&mut self, p: Pending, k: usize, counts: &mut [usize]) -> bool {
        let row = self.row_of(p.worker);
        let set = self.alloc.rows()[row][self.cursor[row]];
        self.cursor[row] += 1;
        self.computed[row] += 1;
        counts[p.worker - 1] += 1;
        let holders = &mut self.holders[set - 1];
        holders.push(p.worker);
        if holders.len() == k {
            self.recovered += 1;
        }
        self.schedule(row);
        self.recovered == self.n
    }
}

/// Simulates CEC or MLCEC: each worker runs its selected sets in increasing
/// order and a set is recovered once `K` of its selectors finish it.
///
/// On an elastic event the allocation is recomputed for the new pool. If the
/// pool size is unchanged, finished subtasks keep counting; otherwise the
/// subdivision changes and every set starts over. In-flight subtasks are lost
/// either way.
pub fn simulate_cec_mlcec(
    params: &SchemeParams,
    initial_workers: &[usize],
    profiles: &[WorkerProfile],
    timeline: &ElasticTimeline,
    ctx: &TrialContext,
) -> Result<TrialOutcome> {
    if params.scheme == Scheme::Bicec {
        return Err(Error::invalid("simulate_cec_mlcec called with bicec parameters"));
    }
    params.validate()?;
    timeline.validate(initial_workers, params.n_min, params.n_max)?;
    let k = params.k;

    let mut active: Vec<usize> = initial_workers.to_vec();
    active.sort_unstable();
    let alloc = allocate(params, &active)?;
    let mut epoch = Epoch::begin(alloc, vec![Vec::new(); active.len()], k, 0.0, profiles, ctx)?;
    let mut counts = vec![0; profiles.len()];
    let mut transitions = Vec::new();
    let mut groups = timeline.groups().peekable();

    let finish = loop {
        let next_event = groups.peek().map(|g| g[0].time);
        let completion_first = match (epoch.heap.peek(), next_event) {
            (Some(p), Some(te)) => p.time <= te,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => {
                let set = epoch
                    .holders
                    .iter()
                    .position(|h| h.len() < k)
                    .map_or(1, |i| i + 1);
                return Err(Error::unrecoverable(
                    Some(set),
                    format!(
                        "set {set} of {} has {} of {k} completions and no work remains",
                        epoch.n,
                        epoch.holders[set - 1].len()
                    ),
                ));
            }
        };

        if completion_first {
            let p = epoch.heap.pop().expect("peeked");
            if epoch.complete(p, k, &mut counts) {
                break p.time;
            }
            continue;
        }

        let group = groups.next().expect("peeked");
        let time = group[0].time;
        for e in group {
            match e.kind {
                ElasticEventKind::Leave => active.retain(|&w| w != e.worker),
                ElasticEventKind::Join => active.push(e.worker),
            }
        }
        active.sort_unstable();
        let after = allocate(params, &active)?;
        let waste = transition_waste(&epoch.alloc, &epoch.cursor, &after);
        let holders = if active.len() == epoch.n {
            std::mem::take(&mut epoch.holders)
        } else {
            vec![Vec::new(); active.len()]
        };
        transitions.push(TransitionRecord {
            time,
            before: epoch.alloc.clone(),
            completed: epoch.cursor.clone(),
            after: after.clone(),
            waste,
        });
        epoch = Epoch::begin(after, holders, k, time, profiles, ctx)?;
    };

    // count simultaneous finishers
    while epoch.heap.peek().is_some_and(|p| p.time == finish) {
        let p = epoch.heap.pop().expect("peeked");
        epoch.complete(p, k, &mut counts);
    }

    let decoding_time =
        decoding_time_model(params.scheme, k, &ctx.dims, epoch.n, ctx.decode_rate);
    let transition_waste_total = transitions.iter().map(|t| t.waste).sum();
    Ok(TrialOutcome {
        metrics: TrialMetrics {
            computation_time: finish,
            decoding_time,
            finishing_time: finish + decoding_time,
            transition_waste_total,
            completed_counts: counts,
        },
        completion: CompletionRecord::Sets {
            workers: epoch.alloc.workers().to_vec(),
            completed: epoch.holders,
        },
        transitions,
        final_n: epoch.n,
    })
}
