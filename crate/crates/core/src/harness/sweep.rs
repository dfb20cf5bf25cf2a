use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::allocation::Scheme;
use crate::error::{Error, Result};
use crate::simkernel::{sample_profiles, simulate, ElasticTimeline, TrialContext, TrialMetrics};

/// Header shared by the per-metric aggregate files.
pub const AGGREGATE_HEADER: &str = "scheme,N,mean,std,trials,seed";
pub const TRIALS_HEADER: &str =
    "scheme,N,trial,seed,status,computation,decoding,finishing,transition_waste";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Computation,
    Decoding,
    Finishing,
    TransitionWaste,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Computation,
        Metric::Decoding,
        Metric::Finishing,
        Metric::TransitionWaste,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            Metric::Computation => "computation",
            Metric::Decoding => "decoding",
            Metric::Finishing => "finishing",
            Metric::TransitionWaste => "transition_waste",
        }
    }

    pub fn of(self, m: &TrialMetrics) -> f64 {
        match self {
            Metric::Computation => m.computation_time,
            Metric::Decoding => m.decoding_time,
            Metric::Finishing => m.finishing_time,
            Metric::TransitionWaste => m.transition_waste_total as f64,
        }
    }
}

/// Seed of trial `trial` at pool size `n`; identical across schemes so the
/// schemes face the same stragglers.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    let mut z = master
        ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (trial as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub scheme: Scheme,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// Error text for unrecoverable trials.
    pub result: std::result::Result<TrialMetrics, String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and population standard deviation.
    pub fn of(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub n: usize,
    pub computation: Stat,
    pub decoding: Stat,
    pub finishing: Stat,
    pub transition_waste: Stat,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
}

impl SummaryRow {
    pub fn stat(&self, metric: Metric) -> Stat {
        match metric {
            Metric::Computation => self.computation,
            Metric::Decoding => self.decoding,
            Metric::Finishing => self.finishing,
            Metric::TransitionWaste => self.transition_waste,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn row(&self, scheme: Scheme, n: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.n == n)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    pub fn aggregate_csv(&self, metric: Metric) -> String {
        let mut out = String::from(AGGREGATE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = r.stat(metric);
            let _ = writeln!(out, "{},{},{},{},{},{}", r.scheme, r.n, s.mean, s.std, r.trials, self.seed);
        }
        out
    }

    pub fn trials_csv(&self) -> String {
        let mut out = String::from(TRIALS_HEADER);
        out.push('\n');
        for t in &self.trials {
            match &t.result {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},ok,{},{},{},{}",
                        t.scheme,
                        t.n,
                        t.trial,
                        t.seed,
                        m.computation_time,
                        m.decoding_time,
                        m.finishing_time,
                        m.transition_waste_total
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},{},{},{},unrecoverable,,,,", t.scheme, t.n, t.trial, t.seed);
                }
            }
        }
        out
    }

    /// Writes one aggregate CSV per metric plus the raw `trials.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for metric in Metric::ALL {
            let path = dir.join(format!("{}.csv", metric.file_stem()));
            fs::write(&path, self.aggregate_csv(metric))?;
            written.push(path);
        }
        let path = dir.join("trials.csv");
        fs::write(&path, self.trials_csv())?;
        written.push(path);
        Ok(written)
    }
}

/// Runs every (scheme, N, trial) combination with static pools `1..=N`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let (base_rate, decode_rate) = config.resolve_rates()?;
    let ctx = TrialContext {
        dims: config.dims,
        decode_rate,
        notice_delay: config.notice_delay,
    };
    let jobs: Vec<(Scheme, usize, usize)> = config
        .schemes
        .iter()
        .flat_map(|&s| {
            config
                .n_sweep
                .iter()
                .flat_map(move |&n| (0..config.trials).map(move |t| (s, n, t)))
        })
        .collect();

    let trials = jobs
        .par_iter()
        .map(|&(scheme, n, trial)| -> Result<TrialRecord> {
            let seed = trial_seed(config.seed, n, trial);
            let profiles = sample_profiles(
                config.n_max(),
                base_rate,
                config.straggler_prob,
                config.slowdown,
                seed,
            )?;
            let workers: Vec<usize> = (1..=n).collect();
            let result = match simulate(
                config.params(scheme),
                &workers,
                &profiles,
                &ElasticTimeline::none(),
                &ctx,
            ) {
                Ok(outcome) => Ok(outcome.metrics),
                Err(e @ Error::Unrecoverable { .. }) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(TrialRecord { scheme, n, trial, seed, result })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = trials
        .chunks(config.trials)
        .map(|chunk| {
            let ok: Vec<&TrialMetrics> = chunk.iter().filter_map(|t| t.result.as_ref().ok()).collect();
            let stat = |metric: Metric| Stat::of(&ok.iter().map(|m| metric.of(m)).collect::<Vec<_>>());
            SummaryRow {
                scheme: chunk[0].scheme,
                n: chunk[0].n,
                computation: stat(Metric::Computation),
                decoding: stat(Metric::Decoding),
                finishing: stat(Metric::Finishing),
                transition_waste: stat(Metric::TransitionWaste),
                trials: ok.len(),
                failures: chunk.len() - ok.len(),
            }
        })
        .collect();

    Ok(SweepResult {
        seed: config.seed,
        rows,
        trials,
    })
}
