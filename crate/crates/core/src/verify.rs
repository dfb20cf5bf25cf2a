//! End-to-end check on real matrices: encode, compute only the subtasks a
//! trial finished, decode, and compare with the direct product.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation::{Scheme, SchemeParams};
use crate::codec::{decode, partition, unpartition, DecodeCost, EncodedBlock, MatrixDims, MdsCode};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Real};
use crate::matrix::{matmul, max_abs_diff, Matrix};

/// Which encoded subtasks had finished when computation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum CompletionRecord {
    /// CEC/MLCEC. `completed[m - 1]` lists the worker ids (codeword
    /// positions) that finished set `m`, in completion order.
    Sets {
        workers: Vec<usize>,
        completed: Vec<Vec<usize>>,
    },
    /// BICEC. Finished codeword indices in completion order.
    Global { completed: Vec<usize> },
}

impl CompletionRecord {
    pub fn scheme_family(&self) -> &'static str {
        match self {
            CompletionRecord::Sets { .. } => "sets",
            CompletionRecord::Global { .. } => "global",
        }
    }

    /// Fails with the first set (or the global pool) short of `k`.
    pub fn check(&self, k: usize) -> Result<()> {
        match self {
            CompletionRecord::Sets { completed, .. } => {
                if let Some(m) = completed.iter().position(|s| distinct(s).len() < k) {
                    return Err(Error::unrecoverable(
                        Some(m + 1),
                        format!("set {} has {} of {k} completions", m + 1, distinct(&completed[m]).len()),
                    ));
                }
            }
            CompletionRecord::Global { completed } => {
                let have = distinct(completed).len();
                if have < k {
                    return Err(Error::unrecoverable(
                        None,
                        format!("{have} of {k} encoded subtasks completed"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn distinct(indices: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(indices.len());
    for &i in indices {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FunctionalResult<E> {
    pub product: Matrix<E>,
    pub max_abs_error: f64,
    /// `max_abs_error` over the largest magnitude in the direct product.
    pub max_rel_error: f64,
    pub decode_costs: Vec<DecodeCost>,
    /// Smallest reciprocal condition estimate over all decodes (real only).
    pub worst_rcond: Option<f64>,
}

/// Recovers `A * B` from the finished subtasks in `completion`.
///
/// `code` is the scheme's outer code: `(K, N_max)` for CEC/MLCEC, where the
/// codeword position is the worker id, and `(K, S * N_max)` for BICEC.
pub fn run_functional<F: Field>(
    code: &MdsCode<F>,
    a: &Matrix<F::Elem>,
    b: &Matrix<F::Elem>,
    params: &SchemeParams,
    completion: &CompletionRecord,
) -> Result<FunctionalResult<F::Elem>> {
    let field = code.field();
    if a.cols() != b.rows() {
        return Err(Error::invalid(format!(
            "A is {}x{} but B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if code.k() != params.k {
        return Err(Error::invalid(format!(
            "code dimension {} differs from K={}",
            code.k(),
            params.k
        )));
    }
    completion.check(params.k)?;
    let k = params.k;
    let mut costs = Vec::new();
    let mut worst_rcond: Option<f64> = None;
    let mut note_rcond = |r: Option<f64>| {
        if let Some(r) = r {
            worst_rcond = Some(worst_rcond.map_or(r, |w| w.min(r)));
        }
    };

    let product = match (params.scheme, completion) {
        (Scheme::Cec | Scheme::Mlcec, CompletionRecord::Sets { completed, .. }) => {
            let n = completed.len();
            // K parts of A, each cut into N row blocks: block (i, m) sits at i*N + m
            let blocks = partition(field, a, k * n)?;
            let mut recovered = vec![None; k * n];
            for (m, holders) in completed.iter().enumerate() {
                let parts: Vec<Matrix<F::Elem>> =
                    (0..k).map(|i| blocks.parts[i * n + m].clone()).collect();
                let received = distinct(holders)
                    .into_iter()
                    .take(k)
                    .map(|worker| {
                        let encoded = code.encode_at(&parts, worker)?;
                        Ok(EncodedBlock {
                            index: worker,
                            data: matmul(field, &encoded, b)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let decoded = decode(code, &received)?;
                costs.push(decoded.cost);
                note_rcond(decoded.rcond_estimate);
                for (i, block) in decoded.blocks.into_iter().enumerate() {
                    recovered[i * n + m] = Some(block);
                }
            }
            let ordered: Vec<Matrix<F::Elem>> = recovered
                .into_iter()
                .map(|b| b.expect("every (part, set) pair decoded"))
                .collect();
            unpartition(&ordered, blocks.pad_rows)?
        }
        (Scheme::Bicec, CompletionRecord::Global { completed }) => {
            let parts = partition(field, a, k)?;
            let received = distinct(completed)
                .into_iter()
                .take(k)
                .map(|index| {
                    let encoded = code.encode_at(&parts.parts, index)?;
                    Ok(EncodedBlock {
                        index,
                        data: matmul(field, &encoded, b)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let decoded = decode(code, &received)?;
            costs.push(decoded.cost);
            note_rcond(decoded.rcond_estimate);
            unpartition(&decoded.blocks, parts.pad_rows)?
        }
        (scheme, record) => {
            return Err(Error::invalid(format!(
                "{scheme} cannot use a {} completion record",
                record.scheme_family()
            )));
        }
    };

    let direct = matmul(field, a, b)?;
    let (max_abs_error, scale) = max_abs_diff(field, &product, &direct);
    let max_rel_error = if scale > 0.0 {
        max_abs_error / scale
    } else {
        max_abs_error
    };
    Ok(FunctionalResult {
        product,
        max_abs_error,
        max_rel_error,
        decode_costs: costs,
        worst_rcond,
    })
}

/// Uniform entries in `[-1, 1)`.
pub fn random_real_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Uniform residues.
pub fn random_field_matrix(
    field: &PrimeField,
    rows: usize,
    cols: usize,
    rng: &mut impl Rng,
) -> Matrix<u64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(0..field.modulus()))
}

/// Median multiply-add throughput (ops/s) of a dense `u x w` by `w x v`
/// product on this host.
pub fn measure_rate(dims: &MatrixDims, repetitions: usize) -> Result<f64> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let a = random_real_matrix(dims.u, dims.w, &mut rng);
    let b = random_real_matrix(dims.w, dims.v, &mut rng);
    let min_window = Duration::from_millis(2);
    let mut rates: Vec<f64> = (0..repetitions)
        .map(|_| {
            let started = Instant::now();
            let mut iterations = 0u64;
            while iterations == 0 || started.elapsed() < min_window {
                black_box(matmul(&Real, black_box(&a), black_box(&b)).expect("shapes agree"));
                iterations += 1;
            }
            iterations as f64 * dims.product_ops() / started.elapsed().as_secs_f64()
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    Ok(rates[rates.len() / 2])
}
