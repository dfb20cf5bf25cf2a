use std::collections::BinaryHeap;

use super::{
    decoding_time_model, profile_for, ElasticEventKind, ElasticTimeline, Pending, SubtaskWork,
    TrialContext, TrialMetrics, TrialOutcome, TransitionRecord, WorkerProfile,
};
use crate::allocation::{bicec_allocate, transition_waste, Scheme, SchemeParams};
use crate::error::{Error, Result};
use crate::verify::CompletionRecord;

#[derive(Clone, Copy)]
struct Stream {
    active: bool,
    /// Subtasks of this worker's fixed list already finished.
    done: usize,
    start: f64,
    done_at_start: usize,
    /// Completions after this instant are dropped (leave + notice).
    deadline: f64,
    generation: u64,
    duration: f64,
}

/// Simulates BICEC: every active worker runs through its fixed list of `S`
/// encoded subtasks and the trial ends at the `K`-th completion overall.
///
/// A leaving worker stops after `notice_delay`; a joining worker resumes at
/// its first unfinished subtask. Allocations never change, so transition
/// waste is always zero.
pub fn simulate_bicec(
    params: &SchemeParams,
    initial_workers: &[usize],
    profiles: &[WorkerProfile],
    timeline: &ElasticTimeline,
    ctx: &TrialContext,
) -> Result<TrialOutcome> {
    if params.scheme != Scheme::Bicec {
        return Err(Error::invalid("simulate_bicec called with non-bicec parameters"));
    }
    params.validate()?;
    timeline.validate(initial_workers, params.n_min, params.n_max)?;
    let (k, s) = (params.k, params.s);
    let work = SubtaskWork::for_bicec(&ctx.dims, k);

    let mut streams = (1..=params.n_max)
        .map(|id| {
            Ok(Stream {
                active: false,
                done: 0,
                start: 0.0,
                done_at_start: 0,
                deadline: f64::INFINITY,
                generation: 0,
                duration: work.duration(profile_for(profiles, id)?.effective_rate()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut heap = BinaryHeap::new();
    let schedule = |heap: &mut BinaryHeap<Pending>, st: &Stream, worker: usize| {
        if st.done < s {
            heap.push(Pending {
                time: st.start + (st.done - st.done_at_start + 1) as f64 * st.duration,
                worker,
                generation: st.generation,
            });
        }
    };
    for &id in initial_workers {
        streams[id - 1].active = true;
        schedule(&mut heap, &streams[id - 1], id);
    }

    let active_ids = |streams: &[Stream]| -> Vec<usize> {
        (1..=streams.len()).filter(|&id| streams[id - 1].active).collect()
    };

    let mut completed_indices = Vec::with_capacity(k);
    let mut transitions = Vec::new();
    let mut groups = timeline.groups().peekable();

    let finish = loop {
        let next_event = groups.peek().map(|g| g[0].time);
        let completion_first = match (heap.peek(), next_event) {
            (Some(p), Some(te)) => p.time <= te,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => {
                return Err(Error::unrecoverable(
                    None,
                    format!(
                        "only {} of {k} encoded subtasks can complete",
                        completed_indices.len()
                    ),
                ));
            }
        };

        if completion_first {
            let p = heap.pop().expect("peeked");
            let st = &mut streams[p.worker - 1];
            if p.generation != st.generation || p.time > st.deadline {
                continue;
            }
            st.done += 1;
            completed_indices.push((p.worker - 1) * s + st.done);
            let st = *st;
            schedule(&mut heap, &st, p.worker);
            if completed_indices.len() == k {
                break p.time;
            }
            continue;
        }

        let group = groups.next().expect("peeked");
        let time = group[0].time;
        let before = bicec_allocate(&active_ids(&streams), s)?;
        let completed: Vec<usize> = before.workers().iter().map(|&id| streams[id - 1].done).collect();
        for e in group {
            let st = &mut streams[e.worker - 1];
            match e.kind {
                ElasticEventKind::Leave => {
                    st.active = false;
                    st.deadline = time + ctx.notice_delay;
                }
                ElasticEventKind::Join => {
                    st.active = true;
                    st.deadline = f64::INFINITY;
                    st.generation += 1;
                    st.start = time;
                    st.done_at_start = st.done;
                    let st = *st;
                    schedule(&mut heap, &st, e.worker);
                }
            }
        }
        let after = bicec_allocate(&active_ids(&streams), s)?;
        let waste = transition_waste(&before, &completed, &after);
        transitions.push(TransitionRecord {
            time,
            before,
            completed,
            after,
            waste,
        });
    };

    // count simultaneous finishers
    while let Some(&p) = heap.peek() {
        if p.time != finish {
            break;
        }
        heap.pop();
        let st = &mut streams[p.worker - 1];
        if p.generation != st.generation || p.time > st.deadline {
            continue;
        }
        st.done += 1;
        completed_indices.push((p.worker - 1) * s + st.done);
    }

    let final_n = streams.iter().filter(|st| st.active).count();
    let decoding_time = decoding_time_model(Scheme::Bicec, k, &ctx.dims, final_n, ctx.decode_rate);
    let mut completed_counts = vec![0; profiles.len()];
    for (i, st) in streams.iter().enumerate() {
        completed_counts[i] = st.done;
    }
    Ok(TrialOutcome {
        metrics: TrialMetrics {
            computation_time: finish,
            decoding_time,
            finishing_time: finish + decoding_time,
            transition_waste_total: transitions.iter().map(|t| t.waste).sum(),
            completed_counts,
        },
        completion: CompletionRecord::Global {
            completed: completed_indices,
        },
        transitions,
        final_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::MatrixDims;
    use crate::simkernel::{sample_profiles, ElasticEvent};

    fn ctx(ops: usize) -> TrialContext {
        TrialContext::new(MatrixDims::new(ops, 1, 1).unwrap(), 1.0)
    }

    #[test]
    fn single_worker_runs_everything() {
        let params = SchemeParams::new(Scheme::Bicec, 5, 5, 1, 1).unwrap();
        let profiles = sample_profiles(1, 2.0, 0.0, 3.0, 0).unwrap();
        // subtask = 10/5 = 2 ops at rate 2 -> 1 s each
        let out = simulate_bicec(&params, &[1], &profiles, &ElasticTimeline::none(), &ctx(10)).unwrap();
        assert_eq!(out.metrics.computation_time, 5.0);
        assert_eq!(out.metrics.transition_waste_total, 0);
    }

    #[test]
    fn completed_fraction_follows_pool_size() {
        let profiles = sample_profiles(8, 1.0, 0.0, 3.0, 0).unwrap();
        for (n, per_worker) in [(8, 75), (6, 100), (4, 150)] {
            let params = SchemeParams::new(Scheme::Bicec, 600, 300, 8, 2).unwrap();
            let ids: Vec<usize> = (1..=n).collect();
            let out = simulate_bicec(&params, &ids, &profiles, &ElasticTimeline::none(), &ctx(600)).unwrap();
            for id in 1..=n {
                assert_eq!(out.metrics.completed_counts[id - 1], per_worker);
            }
        }
    }

    #[test]
    fn capacity_below_k_is_rejected_up_front() {
        // with K <= S * N_min the pool can always finish, so a shortfall is a
        // configuration error rather than a trial outcome
        let params = SchemeParams { scheme: Scheme::Bicec, k: 4, s: 2, n_max: 3, n_min: 1 };
        let profiles = sample_profiles(3, 1.0, 0.0, 3.0, 0).unwrap();
        let timeline = ElasticTimeline::preemptions(&[(0.5, vec![2])]).unwrap();
        let err = simulate_bicec(&params, &[1, 2], &profiles, &timeline, &ctx(4)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn notice_lets_in_flight_work_finish() {
        let params = SchemeParams::new(Scheme::Bicec, 3, 3, 2, 1).unwrap();
        let profiles = sample_profiles(2, 1.0, 0.0, 3.0, 0).unwrap();
        let timeline = ElasticTimeline::preemptions(&[(0.5, vec![2])]).unwrap();
        let mut c = ctx(3); // 1 s per subtask
        let out = simulate_bicec(&params, &[1, 2], &profiles, &timeline, &c).unwrap();
        assert_eq!(out.metrics.computation_time, 3.0);
        assert_eq!(out.metrics.completed_counts, vec![3, 0]);
        c.notice_delay = 0.5;
        let out = simulate_bicec(&params, &[1, 2], &profiles, &timeline, &c).unwrap();
        assert_eq!(out.metrics.computation_time, 2.0);
        assert_eq!(out.metrics.completed_counts, vec![2, 1]);
    }

    #[test]
    fn rejoining_worker_resumes() {
        let params = SchemeParams::new(Scheme::Bicec, 4, 4, 2, 1).unwrap();
        let mut profiles = sample_profiles(2, 1.0, 0.0, 10.0, 0).unwrap();
        profiles[0].is_straggler = true;
        let timeline = ElasticTimeline::new(vec![
            ElasticEvent { time: 1.5, worker: 2, kind: ElasticEventKind::Leave },
            ElasticEvent { time: 10.0, worker: 2, kind: ElasticEventKind::Join },
        ])
        .unwrap();
        // worker 1 needs 10 s per subtask, worker 2 needs 1 s
        let out = simulate_bicec(&params, &[1, 2], &profiles, &timeline, &ctx(4)).unwrap();
        assert_eq!(out.metrics.computation_time, 12.0);
        let CompletionRecord::Global { completed } = &out.completion else {
            panic!("expected global record");
        };
        assert_eq!(completed, &vec![5, 1, 6, 7]);
        assert_eq!(out.transitions.len(), 2);
        assert!(out.transitions.iter().all(|t| t.waste == 0));
    }
}
