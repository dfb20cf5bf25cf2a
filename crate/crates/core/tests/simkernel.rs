use hcec::allocation::allocate;
use hcec::codec::MatrixDims;
use hcec::simkernel::{sample_profiles, simulate, SubtaskWork, TrialContext};
use hcec::{ElasticTimeline, Scheme, SchemeParams, WorkerProfile};
use proptest::prelude::*;

const DIMS: MatrixDims = MatrixDims { u: 60, w: 60, v: 60 };

fn ctx() -> TrialContext {
    TrialContext::new(DIMS, 1.0)
}

fn duration(params: &SchemeParams, n: usize, p: &WorkerProfile) -> f64 {
    let work = match params.scheme {
        Scheme::Bicec => SubtaskWork::for_bicec(&DIMS, params.k),
        _ => SubtaskWork::for_sets(&DIMS, params.k, n),
    };
    work.duration(p.effective_rate())
}

/// Walks time forward in fixed steps and reports the first step at which the
/// recovery condition holds. Worker `i` has finished
/// `min(S, floor(min(t, leave_i) / duration_i))` of its row by time `t`.
fn stepped_time(params: &SchemeParams, profiles: &[WorkerProfile], leave: &[f64], step: f64) -> f64 {
    let n = profiles.len();
    let ids: Vec<usize> = (1..=n).collect();
    let alloc = allocate(params, &ids).unwrap();
    let durations: Vec<f64> = profiles.iter().map(|p| duration(params, n, p)).collect();
    let mut t = 0.0;
    loop {
        t += step;
        let done: Vec<usize> = (0..n)
            .map(|i| ((t.min(leave[i]) / durations[i]).floor() as usize).min(alloc.rows()[i].len()))
            .collect();
        let ok = match params.scheme {
            Scheme::Bicec => done.iter().sum::<usize>() >= params.k,
            _ => (1..=n).all(|set| {
                alloc
                    .rows()
                    .iter()
                    .zip(&done)
                    .filter(|(row, &d)| row[..d].contains(&set))
                    .count()
                    >= params.k
            }),
        };
        if ok {
            return t;
        }
        assert!(t < 1e6, "oracle never recovered");
    }
}

fn small_cases() -> Vec<SchemeParams> {
    let mut out = Vec::new();
    for n in 1..=4 {
        for s in 1..=3usize.min(n) {
            for k in 1..=s {
                out.push(SchemeParams::new(Scheme::Cec, k, s, n, n).unwrap());
                out.push(SchemeParams::new(Scheme::Mlcec, k, s, n, n).unwrap());
            }
            for k in 1..=s * n {
                out.push(SchemeParams::new(Scheme::Bicec, k, s, n, n).unwrap());
            }
        }
    }
    out
}

#[test]
fn event_driven_matches_time_stepped_oracle() {
    for (case, params) in small_cases().into_iter().enumerate() {
        let n = params.n_max;
        for seed in 0..3u64 {
            let profiles = sample_profiles(n, 1.0, 0.5, 2.5, seed * 131 + case as u64).unwrap();
            let ids: Vec<usize> = (1..=n).collect();
            let got = simulate(&params, &ids, &profiles, &ElasticTimeline::none(), &ctx())
                .unwrap()
                .metrics
                .computation_time;
            let shortest = profiles
                .iter()
                .map(|p| duration(&params, n, p))
                .fold(f64::INFINITY, f64::min);
            let step = 1e-4 * shortest;
            let want = stepped_time(&params, &profiles, &vec![f64::INFINITY; n], step);
            assert!((got - want).abs() <= step * 1.000001, "{params:?} seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn bicec_with_departures_matches_time_stepped_oracle() {
    let params = SchemeParams::new(Scheme::Bicec, 5, 3, 4, 2).unwrap();
    for seed in 0..5u64 {
        let profiles = sample_profiles(4, 1.0, 0.5, 3.0, seed).unwrap();
        let d = duration(&params, 4, &profiles[0]);
        let leave_at = 1.3 * d;
        let timeline = ElasticTimeline::preemptions(&[(leave_at, vec![3, 4])]).unwrap();
        let got = simulate(&params, &[1, 2, 3, 4], &profiles, &timeline, &ctx()).unwrap();
        let step = 1e-4 * d;
        let leave = [f64::INFINITY, f64::INFINITY, leave_at, leave_at];
        let want = stepped_time(&params, &profiles, &leave, step);
        assert!((got.metrics.computation_time - want).abs() <= step * 1.000001);
        assert_eq!(got.metrics.transition_waste_total, 0);
    }
}

#[test]
fn identical_inputs_give_identical_outcomes() {
    let profiles = sample_profiles(12, 3.0, 0.5, 3.0, 42).unwrap();
    let timeline = ElasticTimeline::preemptions(&[(0.5, vec![11, 12]), (1.5, vec![9])]).unwrap();
    let ids: Vec<usize> = (1..=12).collect();
    for scheme in Scheme::ALL {
        let params = match scheme {
            Scheme::Bicec => SchemeParams::new(scheme, 30, 5, 12, 8).unwrap(),
            _ => SchemeParams::new(scheme, 3, 6, 12, 8).unwrap(),
        };
        let a = simulate(&params, &ids, &profiles, &timeline, &ctx()).unwrap();
        let b = simulate(&params, &ids, &profiles, &timeline, &ctx()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.transitions.len(), 2);
        let m = &a.metrics;
        assert_eq!(m.finishing_time, m.computation_time + m.decoding_time);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slowing_a_worker_never_helps(
        n in 2usize..10,
        seed in any::<u64>(),
        victim in any::<prop::sample::Index>(),
        extra in 1.0f64..5.0,
    ) {
        let s = (n / 2).max(1);
        let k = (s / 2).max(1);
        let ids: Vec<usize> = (1..=n).collect();
        let profiles = sample_profiles(n, 1.0, 0.5, 3.0, seed).unwrap();
        let mut slower = profiles.clone();
        let v = victim.index(n);
        slower[v].slowdown *= extra;
        slower[v].is_straggler = true;
        for params in [
            SchemeParams::new(Scheme::Cec, k, s, n, n).unwrap(),
            SchemeParams::new(Scheme::Mlcec, k, s, n, n).unwrap(),
            SchemeParams::new(Scheme::Bicec, k * n, s * 2, n, n).unwrap(),
        ] {
            let base = simulate(&params, &ids, &profiles, &ElasticTimeline::none(), &ctx()).unwrap();
            let slow = simulate(&params, &ids, &slower, &ElasticTimeline::none(), &ctx()).unwrap();
            prop_assert!(slow.metrics.computation_time >= base.metrics.computation_time);
        }
    }
}
