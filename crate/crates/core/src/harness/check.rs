use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use crate::allocation::{Scheme, SchemeParams};
use crate::codec::{EvalPoints, MatrixDims, MdsCode};
use crate::error::Result;
use crate::field::{PrimeField, DEFAULT_PRIME};
use crate::simkernel::{sample_profiles, simulate, ElasticTimeline, TrialContext};
use crate::verify::{random_field_matrix, random_real_matrix, run_functional, CompletionRecord};

/// Small enough that every check runs in well under a second.
pub const FUNCTIONAL_DIMS: MatrixDims = MatrixDims { u: 120, w: 96, v: 150 };

/// Real-mode decodes above this dimension are skipped; they are too
/// ill-conditioned to say anything about the scheme.
pub const MAX_REAL_K: usize = 64;

pub const REAL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Real,
    Prime,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Mode::Real => "real",
            Mode::Prime => "prime",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub scheme: Scheme,
    pub mode: Mode,
    pub k: usize,
    pub code_length: usize,
    pub decodes: usize,
    pub max_rel_error: f64,
    pub worst_rcond: Option<f64>,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        match self.mode {
            Mode::Real => self.max_rel_error <= REAL_TOLERANCE,
            Mode::Prime => self.max_rel_error == 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<7} {:<6} {:>4} {:>6} {:>7} {:>12} {:>10}  result", "scheme", "mode", "K", "n", "decodes", "rel_err", "rcond")?;
        for r in &self.rows {
            let rcond = r.worst_rcond.map_or("-".to_string(), |c| format!("{c:.2e}"));
            writeln!(
                f,
                "{:<7} {:<6} {:>4} {:>6} {:>7} {:>12.3e} {:>10}  {}",
                r.scheme,
                r.mode,
                r.k,
                r.code_length,
                r.decodes,
                r.max_rel_error,
                rcond,
                if r.passed() { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Simulates one trial per scheme at `N = N_max` and rebuilds `A * B` on
/// [`FUNCTIONAL_DIMS`] from exactly the subtasks that trial finished.
///
/// Every scheme is checked over the prime field; real arithmetic with
/// Chebyshev points is added when `K <= MAX_REAL_K`.
pub fn run_check(cfg: &ExperimentConfig, dims: MatrixDims) -> Result<CheckReport> {
    let n_max = cfg.n_max();
    let profiles = sample_profiles(n_max, 1.0, cfg.straggler_prob, cfg.slowdown, cfg.seed)?;
    let ctx = TrialContext::new(dims, 1.0);
    let field = PrimeField::new(DEFAULT_PRIME)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for &scheme in &cfg.schemes {
        let params = *cfg.params(scheme);
        let workers: Vec<usize> = (1..=params.n_max).collect();
        let outcome = simulate(&params, &workers, &profiles, &ElasticTimeline::none(), &ctx)?;
        let n = params.code_length();
        if params.k <= MAX_REAL_K {
            let code = MdsCode::real(params.k, n, EvalPoints::Chebyshev)?;
            let a = random_real_matrix(dims.u, dims.w, &mut rng);
            let b = random_real_matrix(dims.w, dims.v, &mut rng);
            let res = run_functional(&code, &a, &b, &params, &outcome.completion)?;
            rows.push(row(&params, Mode::Real, n, &outcome.completion, res.max_rel_error, res.worst_rcond));
        }
        let code = MdsCode::prime(field, params.k, n)?;
        let a = random_field_matrix(&field, dims.u, dims.w, &mut rng);
        let b = random_field_matrix(&field, dims.w, dims.v, &mut rng);
        let res = run_functional(&code, &a, &b, &params, &outcome.completion)?;
        rows.push(row(&params, Mode::Prime, n, &outcome.completion, res.max_rel_error, None));
    }
    Ok(CheckReport { rows })
}

fn row(
    params: &SchemeParams,
    mode: Mode,
    code_length: usize,
    completion: &CompletionRecord,
    max_rel_error: f64,
    worst_rcond: Option<f64>,
) -> CheckRow {
    let decodes = match completion {
        CompletionRecord::Sets { completed, .. } => completed.len(),
        CompletionRecord::Global { .. } => 1,
    };
    CheckRow {
        scheme: params.scheme,
        mode,
        k: params.k,
        code_length,
        decodes,
        max_rel_error,
        worst_rcond,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_config_passes() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("n_max = 8\nn_min = 4\nk_cec = 2\ns_cec = 4\nk_mlcec = 2\ns_mlcec = 4\nk_bicec = 6\ns_bicec = 3")
            .unwrap();
        let report = run_check(&cfg, MatrixDims { u: 12, w: 5, v: 7 }).unwrap();
        // real + prime for each scheme
        assert_eq!(report.rows.len(), 6);
        assert!(report.passed(), "{report}");
    }
}
