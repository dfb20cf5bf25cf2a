use std::fmt;

use super::config::ExperimentConfig;
use crate::allocation::{Scheme, SchemeParams};
use crate::codec::MatrixDims;
use crate::error::Result;
use crate::simkernel::{
    sample_profiles, simulate, ElasticTimeline, SubtaskWork, TrialContext, TrialOutcome,
};

/// Eight workers shrinking to six and then four, with the small example
/// parameters: `K = 2, S = 4` for CEC/MLCEC and `K = 600, S = 300` for BICEC.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDemo {
    pub cec: SchemeParams,
    pub mlcec: SchemeParams,
    pub bicec: SchemeParams,
    pub dims: MatrixDims,
    pub base_rate: f64,
    pub straggler_prob: f64,
    pub slowdown: f64,
    pub seed: u64,
    /// Leave groups. Times are in units of one CEC subtask at the initial
    /// pool size on a non-straggling worker.
    pub preemptions: Vec<(f64, Vec<usize>)>,
}

impl Default for TransitionDemo {
    fn default() -> Self {
        TransitionDemo {
            cec: SchemeParams { scheme: Scheme::Cec, k: 2, s: 4, n_max: 8, n_min: 4 },
            mlcec: SchemeParams { scheme: Scheme::Mlcec, k: 2, s: 4, n_max: 8, n_min: 4 },
            bicec: SchemeParams { scheme: Scheme::Bicec, k: 600, s: 300, n_max: 8, n_min: 4 },
            dims: MatrixDims { u: 2400, w: 2400, v: 2400 },
            base_rate: 1e9,
            straggler_prob: 0.0,
            slowdown: 3.0,
            seed: 1,
            preemptions: vec![(1.25, vec![7, 8]), (2.0, vec![5, 6])],
        }
    }
}

impl TransitionDemo {
    /// Default demo with the straggler model, rate and seed of `cfg`.
    pub fn from_experiment(cfg: &ExperimentConfig) -> Result<Self> {
        let (base_rate, _) = cfg.resolve_rates()?;
        Ok(TransitionDemo {
            base_rate,
            straggler_prob: cfg.straggler_prob,
            slowdown: cfg.slowdown,
            seed: cfg.seed,
            ..TransitionDemo::default()
        })
    }

    pub fn timeline(&self) -> Result<ElasticTimeline> {
        let unit = SubtaskWork::for_sets(&self.dims, self.cec.k, self.cec.n_max).duration(self.base_rate);
        let groups: Vec<(f64, Vec<usize>)> = self
            .preemptions
            .iter()
            .map(|(t, ids)| (t * unit, ids.clone()))
            .collect();
        ElasticTimeline::preemptions(&groups)
    }

    /// Runs all three schemes over the same profiles and timeline.
    pub fn run(&self) -> Result<Vec<(Scheme, TrialOutcome)>> {
        let timeline = self.timeline()?;
        let n_max = self.cec.n_max.max(self.mlcec.n_max).max(self.bicec.n_max);
        let profiles = sample_profiles(n_max, self.base_rate, self.straggler_prob, self.slowdown, self.seed)?;
        let ctx = TrialContext::new(self.dims, self.base_rate);
        [self.cec, self.mlcec, self.bicec]
            .iter()
            .map(|params| {
                let workers: Vec<usize> = (1..=params.n_max).collect();
                Ok((params.scheme, simulate(params, &workers, &profiles, &timeline, &ctx)?))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionRow {
    pub scheme: Scheme,
    /// 1-based event group number.
    pub event: usize,
    pub time: f64,
    pub n_before: usize,
    pub n_after: usize,
    pub waste: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionReport {
    pub rows: Vec<TransitionRow>,
    pub computation_times: Vec<(Scheme, f64)>,
}

impl TransitionReport {
    pub fn total(&self, scheme: Scheme) -> usize {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.waste)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,event,time,n_before,n_after,waste\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.scheme, r.event, r.time, r.n_before, r.n_after, r.waste
            ));
        }
        out
    }
}

impl fmt::Display for TransitionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<7} {:>5} {:>12} {:>4} {:>4} {:>6}", "scheme", "event", "time_s", "from", "to", "waste")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<7} {:>5} {:>12.6} {:>4} {:>4} {:>6}",
                r.scheme, r.event, r.time, r.n_before, r.n_after, r.waste
            )?;
        }
        for (scheme, t) in &self.computation_times {
            writeln!(f, "{scheme}: computation finished at {t:.6} s, total waste {}", self.total(*scheme))?;
        }
        Ok(())
    }
}

pub fn run_transition_demo(demo: &TransitionDemo) -> Result<TransitionReport> {
    let mut rows = Vec::new();
    let mut computation_times = Vec::new();
    for (scheme, outcome) in demo.run()? {
        for (i, t) in outcome.transitions.iter().enumerate() {
            rows.push(TransitionRow {
                scheme,
                event: i + 1,
                time: t.time,
                n_before: t.before.n(),
                n_after: t.after.n(),
                waste: t.waste,
            });
        }
        computation_times.push((scheme, outcome.metrics.computation_time));
    }
    Ok(TransitionReport { rows, computation_times })
}
