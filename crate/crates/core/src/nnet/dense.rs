//! Row-major dense matrix, just enough linear algebra for the layers here.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S: Real> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Real> DenseMatrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "dense matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "matvec: {}x{} against vector of {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = S::zero();
            for c in 0..self.cols {
                acc += row[c] * x[c];
            }
            y.push(acc);
        }
        Ok(y)
    }

    /// `y += M x`, in place.
    pub fn matvec_add(&self, x: &[S], y: &mut [S]) -> Result<()> {
        if x.len() != self.cols || y.len() != self.rows {
            return Err(Error::ShapeMismatch("matvec_add dimensions".into()));
        }
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = S::zero();
            for c in 0..self.cols {
                acc += row[c] * x[c];
            }
            y[r] += acc;
        }
        Ok(())
    }
}
