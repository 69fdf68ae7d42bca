//! Matrix-free linear maps on box coefficient vectors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A square linear map acting on column vectors of length [`dim`](Self::dim).
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; lengths are the caller's responsibility.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// `y = Aᵀ x`
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x)?;
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x)?;
        let mut y = vec![0.0; self.dim()];
        self.apply_transpose_into(x, &mut y);
        Ok(y)
    }
}

pub(crate) fn check_len(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.column(j).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_transpose_into(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_operator_matches_nalgebra() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.5, -1.0, 3.0, 0.0, 0.0, 2.0]);
        let x = [1.0, -2.0, 0.25];
        let want = &a * nalgebra::DVector::from_column_slice(&x);
        let got = a.apply(&x).unwrap();
        assert_eq!(got, want.as_slice());
        let want_t = a.transpose() * nalgebra::DVector::from_column_slice(&x);
        assert_eq!(a.apply_transpose(&x).unwrap(), want_t.as_slice());
        assert!(matches!(
            a.apply(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }
}
