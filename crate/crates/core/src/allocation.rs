//! Subtask selection for CEC, MLCEC and BICEC, the MLCEC d-sequence, and
//! transition waste between two allocations.
//!
//! Indices are 1-based throughout: worker ids live in `1..=n_max`, set
//! indices in `1..=N`, BICEC codeword indices in `1..=S*n_max`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Cec,
    Mlcec,
    Bicec,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Cec, Scheme::Mlcec, Scheme::Bicec];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Cec => "cec",
            Scheme::Mlcec => "mlcec",
            Scheme::Bicec => "bicec",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cec" => Ok(Scheme::Cec),
            "mlcec" => Ok(Scheme::Mlcec),
            "bicec" => Ok(Scheme::Bicec),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Code and allocation parameters of one scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    pub scheme: Scheme,
    /// Recovery threshold: per set for CEC/MLCEC, global for BICEC.
    pub k: usize,
    /// Subtasks each worker selects (CEC/MLCEC) or holds (BICEC).
    pub s: usize,
    pub n_max: usize,
    pub n_min: usize,
}

impl SchemeParams {
    pub fn new(scheme: Scheme, k: usize, s: usize, n_max: usize, n_min: usize) -> Result<Self> {
        let p = SchemeParams {
            scheme,
            k,
            s,
            n_max,
            n_min,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let SchemeParams {
            scheme,
            k,
            s,
            n_max,
            n_min,
        } = *self;
        if k == 0 || s == 0 {
            return Err(Error::invalid(format!("{scheme}: K and S must be positive")));
        }
        if n_min == 0 || n_min > n_max {
            return Err(Error::invalid(format!(
                "{scheme}: need 1 <= N_min <= N_max, got N_min={n_min}, N_max={n_max}"
            )));
        }
        match scheme {
            Scheme::Cec | Scheme::Mlcec => {
                if s > n_max || k > s {
                    return Err(Error::invalid(format!(
                        "{scheme}: need K <= S <= N_max, got K={k}, S={s}, N_max={n_max}"
                    )));
                }
            }
            Scheme::Bicec => {
                if k > s * n_min {
                    return Err(Error::invalid(format!(
                        "bicec: K={k} exceeds S*N_min={}",
                        s * n_min
                    )));
                }
            }
        }
        Ok(())
    }

    /// Codeword length of the scheme's outer code.
    pub fn code_length(&self) -> usize {
        match self.scheme {
            Scheme::Cec | Scheme::Mlcec => self.n_max,
            Scheme::Bicec => self.s * self.n_max,
        }
    }
}

/// Number of MLCEC workers selecting each set, `d_1 <= ... <= d_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSequence(Vec<usize>);

impl DSequence {
    /// Checks monotonicity, `sum = S*N` and `K <= d_m <= N`.
    pub fn new(d: Vec<usize>, s: usize, k: usize) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(Error::invalid("d-sequence is empty"));
        }
        if d.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!("d-sequence {d:?} is not nondecreasing")));
        }
        let sum: usize = d.iter().sum();
        if sum != s * n {
            return Err(Error::invalid(format!(
                "d-sequence sums to {sum}, expected S*N = {}",
                s * n
            )));
        }
        if let Some(bad) = d.iter().find(|&&x| x < k || x > n) {
            return Err(Error::invalid(format!("d_m = {bad} outside [{k}, {n}]")));
        }
        Ok(DSequence(d))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Per-worker selection count implied by double counting.
    pub fn per_worker(&self) -> usize {
        self.0.iter().sum::<usize>() / self.0.len()
    }
}

/// Linear ramp from `K` to `2S - K`, clamped to `[K, N]`, then nudged one unit
/// at a time until it sums to `S*N`. Increments go to the rightmost entry that
/// can grow, decrements to the leftmost entry that can shrink.
pub fn default_d_sequence(n: usize, s: usize, k: usize) -> Result<DSequence> {
    if n == 0 || k == 0 || k > s || s > n {
        return Err(Error::invalid(format!(
            "d-sequence needs 1 <= K <= S <= N, got N={n}, S={s}, K={k}"
        )));
    }
    let alpha = (s - k) as f64;
    let mut d: Vec<usize> = (0..n)
        .map(|m| {
            let ramp = if n == 1 {
                s as f64
            } else {
                s as f64 - alpha + 2.0 * alpha * m as f64 / (n - 1) as f64
            };
            (ramp.round().max(0.0) as usize).clamp(k, n)
        })
        .collect();

    let target = s * n;
    let mut sum: usize = d.iter().sum();
    while sum < target {
        let i = (0..n)
            .rev()
            .find(|&i| d[i] < n && (i == n - 1 || d[i] < d[i + 1]))
            .expect("sum below S*N implies an entry below N");
        d[i] += 1;
        sum += 1;
    }
    while sum > target {
        let i = (0..n)
            .find(|&i| d[i] > k && (i == 0 || d[i] > d[i - 1]))
            .expect("sum above S*N implies an entry above K");
        d[i] -= 1;
        sum -= 1;
    }
    DSequence::new(d, s, k)
}

/// Which worker processes which slots, in processing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationMatrix {
    scheme: Scheme,
    workers: Vec<usize>,
    rows: Vec<Vec<usize>>,
}

impl AllocationMatrix {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Active worker count.
    pub fn n(&self) -> usize {
        self.workers.len()
    }

    pub fn workers(&self) -> &[usize] {
        &self.workers
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row_of(&self, worker: usize) -> Option<&[usize]> {
        self.workers
            .iter()
            .position(|&w| w == worker)
            .map(|i| self.rows[i].as_slice())
    }

    /// How many workers hold each slot `1..=slots`.
    pub fn column_counts(&self, slots: usize) -> Vec<usize> {
        let mut counts = vec![0; slots];
        for &slot in self.rows.iter().flatten() {
            if slot >= 1 && slot <= slots {
                counts[slot - 1] += 1;
            }
        }
        counts
    }

    /// Relabels positional workers `1..=N` with the given ids (sorted order).
    pub fn with_worker_ids(mut self, ids: &[usize]) -> Result<Self> {
        if ids.len() != self.workers.len() {
            return Err(Error::invalid(format!(
                "{} worker ids for {} allocation rows",
                ids.len(),
                self.workers.len()
            )));
        }
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate worker id"));
        }
        self.workers = sorted;
        Ok(self)
    }

    /// One worker per line, selected indices separated by spaces.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses the text produced by [`AllocationMatrix::to_dump`].
pub fn parse_dump(text: &str) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .map(|line| {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| Error::invalid(format!("bad index '{t}': {e}")))
                })
                .collect()
        })
        .collect()
}

/// Cyclic selection: worker `n` takes sets `n, n+1, ..., n+S-1` (mod N).
pub fn cec_allocate(n: usize, s: usize) -> Result<AllocationMatrix> {
    if n == 0 || s == 0 || s > n {
        return Err(Error::invalid(format!("cec allocation needs 1 <= S <= N, got S={s}, N={n}")));
    }
    let rows = (1..=n)
        .map(|worker| {
            let mut row: Vec<usize> = (0..s).map(|i| (worker - 1 + i) % n + 1).collect();
            row.sort_unstable();
            row
        })
        .collect();
    Ok(AllocationMatrix {
        scheme: Scheme::Cec,
        workers: (1..=n).collect(),
        rows,
    })
}

/// Sets are handed out from the last (`l = N`) to the first. Set `l` goes to
/// `d_l` consecutive workers (wrapping) starting at the lowest-index worker
/// with the fewest subtasks among sets `l+1..N`.
pub fn mlcec_allocate(n: usize, d: &DSequence) -> Result<AllocationMatrix> {
    let d = d.as_slice();
    if d.len() != n {
        return Err(Error::invalid(format!("d-sequence has {} entries for N={n}", d.len())));
    }
    if let Some(bad) = d.iter().find(|&&x| x > n) {
        return Err(Error::invalid(format!("d_m = {bad} exceeds N={n}")));
    }
    let total: usize = d.iter().sum();
    if !total.is_multiple_of(n) {
        return Err(Error::invalid(format!("sum of d ({total}) is not a multiple of N={n}")));
    }

    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for set in (1..=n).rev() {
        // min_by_key keeps the first minimum, i.e. the lowest worker index
        let start = (0..n).min_by_key(|&w| rows[w].len()).unwrap_or(0);
        for offset in 0..d[set - 1] {
            rows[(start + offset) % n].push(set);
        }
    }
    let s = total / n;
    if let Some(w) = rows.iter().position(|r| r.len() != s) {
        return Err(Error::invalid(format!(
            "d-sequence leaves worker {} with {} subtasks instead of {s}",
            w + 1,
            rows[w].len()
        )));
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    Ok(AllocationMatrix {
        scheme: Scheme::Mlcec,
        workers: (1..=n).collect(),
        rows,
    })
}

/// Worker `id` holds codeword indices `(id-1)*S + 1 ..= id*S`, independent of
/// who else is active.
pub fn bicec_allocate(worker_ids: &[usize], s: usize) -> Result<AllocationMatrix> {
    if s == 0 {
        return Err(Error::invalid("bicec allocation needs S >= 1"));
    }
    let mut workers = worker_ids.to_vec();
    workers.sort_unstable();
    if workers.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("duplicate worker id in bicec allocation"));
    }
    if workers.first() == Some(&0) {
        return Err(Error::invalid("worker ids are 1-based"));
    }
    let rows = workers
        .iter()
        .map(|&id| ((id - 1) * s + 1..=id * s).collect())
        .collect();
    Ok(AllocationMatrix {
        scheme: Scheme::Bicec,
        workers,
        rows,
    })
}

/// Allocation of `params` for the given active worker ids. CEC/MLCEC rows are
/// computed for `N = ids.len()` positions and handed to the ids in ascending
/// order; MLCEC uses [`default_d_sequence`].
pub fn allocate(params: &SchemeParams, active: &[usize]) -> Result<AllocationMatrix> {
    let n = active.len();
    match params.scheme {
        Scheme::Cec => cec_allocate(n, params.s)?.with_worker_ids(active),
        Scheme::Mlcec => {
            let d = default_d_sequence(n, params.s, params.k)?;
            mlcec_allocate(n, &d)?.with_worker_ids(active)
        }
        Scheme::Bicec => bicec_allocate(active, params.s),
    }
}

/// Subtasks surviving workers must abandon or newly take on.
///
/// `completed[i]` is how many leading entries of `before.rows()[i]` were
/// already finished; those are never counted as abandoned.
pub fn transition_waste(
    before: &AllocationMatrix,
    completed: &[usize],
    after: &AllocationMatrix,
) -> usize {
    let mut waste = 0;
    for (i, (&worker, old_row)) in before.workers.iter().zip(&before.rows).enumerate() {
        let Some(new_row) = after.row_of(worker) else {
            continue;
        };
        let done = completed.get(i).copied().unwrap_or(0).min(old_row.len());
        let old_all: BTreeSet<usize> = old_row.iter().copied().collect();
        let new_set: BTreeSet<usize> = new_row.iter().copied().collect();
        waste += old_row[done..]
            .iter()
            .filter(|slot| !new_set.contains(slot))
            .count();
        waste += new_set.difference(&old_all).count();
    }
    waste
}
