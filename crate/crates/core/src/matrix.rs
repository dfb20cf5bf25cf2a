use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::Field;

/// Dense row-major matrix. Arithmetic goes through a [`Field`] context.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy> Matrix<E> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} elements do not form a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [E] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[E] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn map<T: Copy>(&self, f: impl FnMut(E) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_slice(&self, start: usize, end: usize) -> Matrix<E> {
        assert!(start <= end && end <= self.rows, "row range out of bounds");
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Vertical concatenation. All blocks must share a column count.
    pub fn vstack(blocks: &[Matrix<E>]) -> Result<Matrix<E>> {
        let Some(first) = blocks.first() else {
            return Err(Error::invalid("cannot stack zero blocks"));
        };
        let cols = first.cols;
        if let Some(bad) = blocks.iter().find(|b| b.cols != cols) {
            return Err(Error::invalid(format!(
                "column mismatch in vstack: {} vs {}",
                bad.cols, cols
            )));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn transpose(&self) -> Matrix<E> {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;

    fn index(&self, (r, c): (usize, usize)) -> &E {
        &self.data[r * self.cols + c]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut E {
        &mut self.data[r * self.cols + c]
    }
}

pub fn zeros<F: Field>(field: &F, rows: usize, cols: usize) -> Matrix<F::Elem> {
    Matrix::filled(rows, cols, field.zero())
}

/// `a * b` using i-k-j loop order.
pub fn matmul<F: Field>(
    field: &F,
    a: &Matrix<F::Elem>,
    b: &Matrix<F::Elem>,
) -> Result<Matrix<F::Elem>> {
    if a.cols != b.rows {
        return Err(Error::invalid(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = zeros(field, a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o = field.mul_add(*o, aik, bkj);
            }
        }
    }
    Ok(out)
}

/// `acc += scale * x`, elementwise.
pub fn axpy<F: Field>(field: &F, acc: &mut Matrix<F::Elem>, scale: F::Elem, x: &Matrix<F::Elem>) {
    assert_eq!(acc.shape(), x.shape(), "axpy shape mismatch");
    for (a, &v) in acc.data.iter_mut().zip(&x.data) {
        *a = field.mul_add(*a, scale, v);
    }
}

/// Largest elementwise distance, and the largest magnitude in `reference`.
pub fn max_abs_diff<F: Field>(
    field: &F,
    got: &Matrix<F::Elem>,
    reference: &Matrix<F::Elem>,
) -> (f64, f64) {
    assert_eq!(got.shape(), reference.shape(), "comparison shape mismatch");
    let err = got
        .data
        .iter()
        .zip(&reference.data)
        .map(|(&g, &r)| field.distance(g, r))
        .fold(0.0, f64::max);
    let scale = reference
        .data
        .iter()
        .map(|&r| field.magnitude(r))
        .fold(0.0, f64::max);
    (err, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Real};

    #[test]
    fn small_product() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let b = Matrix::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = matmul(&Real, &a, &b).unwrap();
        assert_eq!(c.as_slice(), &[58.0, 64.0, 139.0, 154.0]);
        assert!(matmul(&Real, &a, &a).is_err());
    }

    #[test]
    fn field_product_wraps() {
        let f = PrimeField::new(7).unwrap();
        let a = Matrix::from_vec(1, 2, vec![3, 4]).unwrap();
        let b = Matrix::from_vec(2, 1, vec![5, 6]).unwrap();
        // 15 + 24 = 39 = 4 mod 7
        assert_eq!(matmul(&f, &a, &b).unwrap().as_slice(), &[4]);
    }

    #[test]
    fn vstack_and_slice() {
        let a = Matrix::from_fn(2, 2, |r, c| (r * 2 + c) as f64);
        let b = Matrix::from_fn(1, 2, |_, c| 10.0 + c as f64);
        let s = Matrix::vstack(&[a.clone(), b]).unwrap();
        assert_eq!(s.shape(), (3, 2));
        assert_eq!(s.row_slice(0, 2), a);
        assert_eq!(s.row(2), &[10.0, 11.0]);
        let bad = Matrix::filled(1, 3, 0.0);
        assert!(Matrix::vstack(&[s, bad]).is_err());
    }
}
