//! Row partitioning of `A` and polynomial (Vandermonde) MDS codes.
//!
//! A `(k, n)` code maps message blocks `P_1..P_k` to codeword blocks
//! `Q_j = sum_i P_i * x_j^(i-1)` for `n` distinct evaluation points `x_j`.
//! Any `k` codeword blocks determine the message: decoding is a Vandermonde
//! solve, done here with the Bjorck-Pereyra recurrences (Newton divided
//! differences followed by a change to the monomial basis), which costs
//! `O(k^2)` per matrix entry and works in any field.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::field::{batch_inverse, Field, PrimeField, Real};
use crate::matrix::Matrix;

/// Below this reciprocal condition estimate a real decode is flagged.
pub const RCOND_WARN_THRESHOLD: f64 = 1e-10;

/// Shapes of `A (u x w)` and `B (w x v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixDims {
    pub u: usize,
    pub w: usize,
    pub v: usize,
}

impl MatrixDims {
    pub fn new(u: usize, w: usize, v: usize) -> Result<Self> {
        if u == 0 || w == 0 || v == 0 {
            return Err(Error::invalid(format!("dimensions must be positive, got ({u},{w},{v})")));
        }
        Ok(MatrixDims { u, w, v })
    }

    /// Multiply-add count of the full product `A * B`.
    pub fn product_ops(&self) -> f64 {
        self.u as f64 * self.w as f64 * self.v as f64
    }
}

/// `A` split by rows into `k` equally sized parts, zero-padded at the bottom.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<E> {
    pub parts: Vec<Matrix<E>>,
    pub pad_rows: usize,
}

impl<E: Copy> Partition<E> {
    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn part_shape(&self) -> (usize, usize) {
        self.parts[0].shape()
    }
}

pub fn partition<F: Field>(field: &F, a: &Matrix<F::Elem>, k: usize) -> Result<Partition<F::Elem>> {
    if k == 0 {
        return Err(Error::invalid("partition count k must be at least 1"));
    }
    let rows = a.rows().div_ceil(k);
    let pad_rows = rows * k - a.rows();
    let parts = (0..k)
        .map(|i| {
            Matrix::from_fn(rows, a.cols(), |r, c| {
                let src = i * rows + r;
                if src < a.rows() {
                    a[(src, c)]
                } else {
                    field.zero()
                }
            })
        })
        .collect();
    Ok(Partition { parts, pad_rows })
}

/// Stacks `blocks` and drops the trailing `pad_rows` rows.
pub fn unpartition<E: Copy>(blocks: &[Matrix<E>], pad_rows: usize) -> Result<Matrix<E>> {
    let Some(first) = blocks.first() else {
        return Err(Error::invalid("no blocks to unpartition"));
    };
    if blocks.iter().any(|b| b.shape() != first.shape()) {
        return Err(Error::invalid("blocks differ in shape"));
    }
    let stacked = Matrix::vstack(blocks)?;
    if pad_rows > stacked.rows() {
        return Err(Error::invalid(format!(
            "pad_rows {pad_rows} exceeds stacked row count {}",
            stacked.rows()
        )));
    }
    Ok(stacked.row_slice(0, stacked.rows() - pad_rows))
}

/// How evaluation points are laid out for a real-valued code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalPoints {
    /// `1, 2, ..., n`, the polynomial-code layout `A_1 + n A_2`.
    #[default]
    Integers,
    /// Chebyshev nodes of the first kind on `[-1, 1]`, assigned to codeword
    /// positions with a coprime stride so neighbouring positions sit far apart.
    Chebyshev,
}

impl EvalPoints {
    pub fn real_points(self, n: usize) -> Vec<f64> {
        match self {
            EvalPoints::Integers => (1..=n).map(|x| x as f64).collect(),
            EvalPoints::Chebyshev => {
                let stride = spreading_stride(n);
                (0..n)
                    .map(|j| {
                        let node = (j * stride) % n;
                        ((2 * node + 1) as f64 * PI / (2 * n) as f64).cos()
                    })
                    .collect()
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stride coprime to `n` closest to `n / phi^2`.
fn spreading_stride(n: usize) -> usize {
    if n <= 2 {
        return 1;
    }
    let target = n as f64 * 0.381_966_011_250_105;
    (1..n)
        .filter(|&s| gcd(s, n) == 1)
        .min_by(|&a, &b| {
            let da = (a as f64 - target).abs();
            let db = (b as f64 - target).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap_or(1)
}

/// A `(k, n)` polynomial MDS code over `F`.
#[derive(Clone, Debug)]
pub struct MdsCode<F: Field> {
    field: F,
    k: usize,
    eval_points: Vec<F::Elem>,
}

impl<F: Field> MdsCode<F> {
    pub fn new(field: F, k: usize, eval_points: Vec<F::Elem>) -> Result<Self> {
        let n = eval_points.len();
        if k == 0 {
            return Err(Error::invalid("code dimension k must be at least 1"));
        }
        if n < k {
            return Err(Error::invalid(format!("code length n={n} is below k={k}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if eval_points[i] == eval_points[j] {
                    return Err(Error::invalid(format!(
                        "evaluation points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(MdsCode {
            field,
            k,
            eval_points,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.eval_points.len()
    }

    pub fn eval_points(&self) -> &[F::Elem] {
        &self.eval_points
    }

    /// Evaluation point of the 1-based codeword position `index`.
    pub fn point(&self, index: usize) -> Result<F::Elem> {
        if index == 0 || index > self.n() {
            return Err(Error::invalid(format!(
                "codeword index {index} outside 1..={}",
                self.n()
            )));
        }
        Ok(self.eval_points[index - 1])
    }

    /// Codeword block at 1-based position `index`, by Horner's rule.
    pub fn encode_at(&self, parts: &[Matrix<F::Elem>], index: usize) -> Result<Matrix<F::Elem>> {
        if parts.len() != self.k {
            return Err(Error::invalid(format!(
                "partition has {} parts but the code expects k={}",
                parts.len(),
                self.k
            )));
        }
        let shape = parts[0].shape();
        if parts.iter().any(|p| p.shape() != shape) {
            return Err(Error::invalid("partition parts differ in shape"));
        }
        let x = self.point(index)?;
        let f = &self.field;
        let mut acc = parts[self.k - 1].clone();
        for part in parts[..self.k - 1].iter().rev() {
            for (a, &p) in acc.as_mut_slice().iter_mut().zip(part.as_slice()) {
                *a = f.mul_add(p, *a, x);
            }
        }
        Ok(acc)
    }
}

impl MdsCode<Real> {
    pub fn real(k: usize, n: usize, points: EvalPoints) -> Result<Self> {
        MdsCode::new(Real, k, points.real_points(n))
    }
}

impl MdsCode<PrimeField> {
    /// Points `1..=n`; requires `n < p` so they stay distinct.
    pub fn prime(field: PrimeField, k: usize, n: usize) -> Result<Self> {
        if n as u64 >= field.modulus() {
            return Err(Error::invalid(format!(
                "code length {n} needs a modulus above n, got {}",
                field.modulus()
            )));
        }
        MdsCode::new(field, k, (1..=n as u64).collect())
    }
}

/// One codeword symbol: a matrix block and its 1-based position.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedBlock<E> {
    pub index: usize,
    pub data: Matrix<E>,
}

pub fn encode<F: Field>(
    partition: &Partition<F::Elem>,
    code: &MdsCode<F>,
) -> Result<Vec<EncodedBlock<F::Elem>>> {
    (1..=code.n())
        .map(|index| {
            Ok(EncodedBlock {
                index,
                data: code.encode_at(&partition.parts, index)?,
            })
        })
        .collect()
}

/// Operation counts of one decode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeCost {
    /// Side length of the Vandermonde system.
    pub solve_size: usize,
    /// Multiply-adds spent applying the `k x k` inverse to `k` received
    /// blocks: `k * k * block_rows * block_cols`.
    pub reconstruction_ops: u64,
}

impl DecodeCost {
    pub fn new(k: usize, block_rows: usize, block_cols: usize) -> Self {
        DecodeCost {
            solve_size: k,
            reconstruction_ops: (k * k) as u64 * block_rows as u64 * block_cols as u64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decoded<E> {
    pub blocks: Vec<Matrix<E>>,
    pub cost: DecodeCost,
    /// Lower bound on the reciprocal 1-norm condition number of the solved
    /// Vandermonde system. Only computed for inexact fields.
    pub rcond_estimate: Option<f64>,
}

impl<E> Decoded<E> {
    pub fn ill_conditioned(&self) -> bool {
        self.rcond_estimate
            .is_some_and(|r| r < RCOND_WARN_THRESHOLD)
    }
}

/// Recovers the `k` message blocks from exactly `k` received codeword blocks.
pub fn decode<F: Field>(
    code: &MdsCode<F>,
    received: &[EncodedBlock<F::Elem>],
) -> Result<Decoded<F::Elem>> {
    let k = code.k();
    if received.len() != k {
        return Err(Error::invalid(format!(
            "decode needs exactly k={k} blocks, got {}",
            received.len()
        )));
    }
    let mut seen = vec![false; code.n() + 1];
    for b in received {
        code.point(b.index)?;
        if std::mem::replace(&mut seen[b.index], true) {
            return Err(Error::invalid(format!("codeword index {} repeated", b.index)));
        }
    }
    let shape = received[0].data.shape();
    if received.iter().any(|b| b.data.shape() != shape) {
        return Err(Error::invalid("received blocks differ in shape"));
    }

    let field = code.field();
    let points: Vec<F::Elem> = received
        .iter()
        .map(|b| code.eval_points()[b.index - 1])
        .collect();
    let mut coeffs: Vec<Vec<F::Elem>> = received
        .iter()
        .map(|b| b.data.as_slice().to_vec())
        .collect();
    vandermonde_solve(field, &points, &mut coeffs)?;

    let rcond_estimate = if field.is_exact() {
        None
    } else {
        let r = vandermonde_rcond_estimate(field, &points);
        if r < RCOND_WARN_THRESHOLD {
            warn!("ill-conditioned {k}x{k} Vandermonde decode (rcond estimate {r:.3e})");
        }
        Some(r)
    };

    let blocks = coeffs
        .into_iter()
        .map(|data| Matrix::from_vec(shape.0, shape.1, data))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decoded {
        blocks,
        cost: DecodeCost::new(k, shape.0, shape.1),
        rcond_estimate,
    })
}

/// Solves `V c = y` in place where `V[j][i] = x_j^i`; each `rhs[j]` holds the
/// right-hand side entries of row `j` and is overwritten with coefficient `j`.
pub fn vandermonde_solve<F: Field>(
    field: &F,
    points: &[F::Elem],
    rhs: &mut [Vec<F::Elem>],
) -> Result<()> {
    let n = points.len();
    if rhs.len() != n {
        return Err(Error::invalid("right-hand side length differs from point count"));
    }
    if n == 0 {
        return Ok(());
    }

    // Reciprocal differences for every level of the divided-difference table.
    let mut diffs = Vec::with_capacity(n * (n - 1) / 2);
    for level in 0..n - 1 {
        for j in level + 1..n {
            diffs.push(field.sub(points[j], points[j - level - 1]));
        }
    }
    let inv_diffs = if field.is_exact() {
        batch_inverse(field, &diffs)
    } else {
        diffs.iter().map(|&d| field.inv(d)).collect()
    }
    .ok_or_else(|| Error::invalid("evaluation points are not distinct"))?;

    // Newton divided differences.
    let mut cursor = 0;
    for level in 0..n - 1 {
        let level_inv = &inv_diffs[cursor..cursor + (n - level - 1)];
        cursor += n - level - 1;
        for j in (level + 1..n).rev() {
            let scale = level_inv[j - level - 1];
            let (lo, hi) = rhs.split_at_mut(j);
            for (a, &b) in hi[0].iter_mut().zip(&lo[j - 1]) {
                *a = field.mul(field.sub(*a, b), scale);
            }
        }
    }
    // Newton form to monomial coefficients.
    for level in (0..n - 1).rev() {
        let x = points[level];
        for j in level..n - 1 {
            let (lo, hi) = rhs.split_at_mut(j + 1);
            for (a, &b) in lo[j].iter_mut().zip(&hi[0]) {
                *a = field.sub(*a, field.mul(x, b));
            }
        }
    }
    Ok(())
}

/// Reciprocal 1-norm condition number `1 / (||V||_1 ||V^-1||_1)` of the
/// square Vandermonde matrix on `points`. `V^-1` is formed column by column
/// with the same solver, so this costs `O(k^3)`.
pub fn vandermonde_rcond_estimate<F: Field>(field: &F, points: &[F::Elem]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 1.0;
    }
    let norm_v = (0..n)
        .map(|c| {
            points
                .iter()
                .map(|&x| field.magnitude(field.pow(x, c as u64)))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let mut inv: Vec<Vec<F::Elem>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect())
        .collect();
    if vandermonde_solve(field, points, &mut inv).is_err() {
        return 0.0;
    }
    let norm_inv = (0..n)
        .map(|col| inv.iter().map(|row| field.magnitude(row[col])).sum::<f64>())
        .fold(0.0, f64::max);
    let r = 1.0 / (norm_v * norm_inv);
    if r.is_finite() {
        r
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize, cols: usize) -> Matrix<f64> {
        Matrix::from_fn(rows, cols, |r, c| (r * cols + c) as f64 + 1.0)
    }

    #[test]
    fn partition_exact_and_padded() {
        let a = ramp(4, 3);
        let p = partition(&Real, &a, 2).unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.part_shape(), (2, 3));
        assert_eq!(p.pad_rows, 0);

        let a = ramp(5, 3);
        let p = partition(&Real, &a, 2).unwrap();
        assert_eq!(p.part_shape(), (3, 3));
        assert_eq!(p.pad_rows, 1);
        assert_eq!(p.parts[1].row(2), &[0.0, 0.0, 0.0]);
        assert_eq!(unpartition(&p.parts, p.pad_rows).unwrap(), a);
    }

    #[test]
    fn partition_2400_into_ten() {
        let a = Matrix::filled(2400, 2, 1.0);
        let p = partition(&Real, &a, 10).unwrap();
        assert_eq!(p.k(), 10);
        assert_eq!(p.part_shape(), (240, 2));
        assert_eq!(p.pad_rows, 0);
    }

    #[test]
    fn partition_rejects_zero_parts() {
        assert!(matches!(
            partition(&Real, &ramp(2, 2), 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unpartition_identity_and_errors() {
        let a = ramp(3, 2);
        assert_eq!(unpartition(std::slice::from_ref(&a), 0).unwrap(), a);
        assert!(unpartition(&[ramp(2, 2), ramp(3, 2)], 0).is_err());
        assert!(unpartition::<f64>(&[], 0).is_err());
    }

    #[test]
    fn polynomial_code_layout() {
        // Q_n = A_1 + n A_2
        let a = ramp(4, 2);
        let p = partition(&Real, &a, 2).unwrap();
        let code = MdsCode::real(2, 8, EvalPoints::Integers).unwrap();
        let enc = encode(&p, &code).unwrap();
        assert_eq!(enc.len(), 8);
        for b in &enc {
            let n = b.index as f64;
            let expect = Matrix::from_fn(2, 2, |r, c| p.parts[0][(r, c)] + n * p.parts[1][(r, c)]);
            assert_eq!(b.data, expect);
        }
    }

    #[test]
    fn degree_zero_code_copies_the_message() {
        let a = ramp(3, 3);
        let p = partition(&Real, &a, 1).unwrap();
        let code = MdsCode::real(1, 5, EvalPoints::Integers).unwrap();
        for b in encode(&p, &code).unwrap() {
            assert_eq!(b.data, a);
        }
        let got = decode(&code, &[EncodedBlock { index: 4, data: a.clone() }]).unwrap();
        assert_eq!(got.blocks, vec![a]);
    }

    #[test]
    fn two_by_two_hand_solution() {
        // From Q_1 = A1 + A2 and Q_2 = A1 + 2 A2: A1 = 2 Q_1 - Q_2, A2 = Q_2 - Q_1.
        let q1 = Matrix::from_vec(1, 2, vec![5.0, -1.0]).unwrap();
        let q2 = Matrix::from_vec(1, 2, vec![8.0, 3.0]).unwrap();
        let code = MdsCode::real(2, 8, EvalPoints::Integers).unwrap();
        let got = decode(
            &code,
            &[
                EncodedBlock { index: 2, data: q2.clone() },
                EncodedBlock { index: 1, data: q1.clone() },
            ],
        )
        .unwrap();
        assert_eq!(got.blocks[0].as_slice(), &[2.0, -5.0]);
        assert_eq!(got.blocks[1].as_slice(), &[3.0, 4.0]);
        assert_eq!(got.cost.solve_size, 2);
        assert_eq!(got.cost.reconstruction_ops, 2 * 2 * 2);
    }

    #[test]
    fn decode_rejects_bad_requests() {
        let code = MdsCode::real(2, 4, EvalPoints::Integers).unwrap();
        let blk = |index| EncodedBlock { index, data: ramp(1, 1) };
        assert!(decode(&code, &[blk(1)]).is_err());
        assert!(decode(&code, &[blk(1), blk(1)]).is_err());
        assert!(decode(&code, &[blk(1), blk(5)]).is_err());
        assert!(decode(&code, &[blk(0), blk(2)]).is_err());
    }

    #[test]
    fn code_validation() {
        assert!(MdsCode::new(Real, 3, vec![1.0, 2.0]).is_err());
        assert!(MdsCode::new(Real, 2, vec![1.0, 2.0, 1.0]).is_err());
        assert!(MdsCode::new(Real, 0, vec![1.0]).is_err());
        let small = PrimeField::new(7).unwrap();
        assert!(MdsCode::prime(small, 2, 7).is_err());
        assert!(MdsCode::prime(small, 2, 6).is_ok());
    }

    #[test]
    fn ill_conditioning_is_flagged_not_fatal() {
        let k = 10;
        let code = MdsCode::real(k, 40, EvalPoints::Integers).unwrap();
        let a = ramp(k, 1);
        let p = partition(&Real, &a, k).unwrap();
        let enc = encode(&p, &code).unwrap();
        let got = decode(&code, &enc[30..40]).unwrap();
        assert!(got.ill_conditioned());
        assert_eq!(got.blocks.len(), k);

        let code = MdsCode::real(2, 8, EvalPoints::Integers).unwrap();
        let p = partition(&Real, &ramp(2, 1), 2).unwrap();
        let enc = encode(&p, &code).unwrap();
        assert!(!decode(&code, &enc[..2]).unwrap().ill_conditioned());
    }

    #[test]
    fn chebyshev_points_are_distinct_and_spread() {
        let pts = EvalPoints::Chebyshev.real_points(40);
        let mut sorted = pts.clone();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|x| x.abs() < 1.0));
        assert_eq!(spreading_stride(40), 17);
        assert_eq!(spreading_stride(8), 3);
        // consecutive positions are not consecutive nodes
        assert!((pts[0] - pts[1]).abs() > 0.5);
    }

    #[test]
    fn rcond_matches_hand_value() {
        // V = [[1, 1], [1, 2]]: ||V||_1 = 3, V^-1 = [[2, -1], [-1, 1]], ||V^-1||_1 = 3.
        let est = vandermonde_rcond_estimate(&Real, &[1.0, 2.0]);
        assert!((est - 1.0 / 9.0).abs() < 1e-15);
    }
}
