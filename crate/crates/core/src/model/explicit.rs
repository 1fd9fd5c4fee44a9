use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Explicit symmetric `n x n` matrices `A_i`.
#[derive(Clone, Debug)]
pub struct MatrixEnsemble {
    n: usize,
    matrices: Vec<DMatrix<f64>>,
}

impl MatrixEnsemble {
    pub fn new(n: usize, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        if n == 0 || matrices.is_empty() {
            return Err(Error::InvalidParameter("matrix ensemble needs n >= 1 and at least one matrix".into()));
        }
        for (index, a) in matrices.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.nrows().max(a.ncols()) });
            }
            if a != &a.transpose() {
                return Err(Error::NotSymmetric { index });
            }
        }
        Ok(Self { n, matrices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub(crate) fn quadratic_values(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        self.matrices.iter().map(|a| x.dot(&(a * &x))).collect()
    }

    pub(crate) fn gradient(&self, x: &[f64], y: &[f64], w: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        let mut grad = DVector::zeros(self.n);
        for ((a, yi), wi) in self.matrices.iter().zip(y).zip(w) {
            let ax = a * &x;
            let residual = x.dot(&ax) - yi;
            grad.axpy(4.0 * wi * residual, &ax, 1.0);
        }
        grad.as_slice().to_vec()
    }

    pub(crate) fn blocks(&self, support: &[usize]) -> Vec<DMatrix<f64>> {
        self.matrices.iter().map(|a| a.select_rows(support).select_columns(support)).collect()
    }
}
