//! Ordered products of transfer matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::transfer::matrix::{TimeSpan, TransferMatrix};
use crate::transfer::operator::LinearOperator;

/// Consecutive transfer matrices, earliest first. Acts as the product
/// with later factors on the left, without forming it.
#[derive(Clone, Debug)]
pub struct Cocycle {
    n: usize,
    span: TimeSpan,
    factors: Vec<TransferMatrix>,
}

impl Cocycle {
    pub fn new(factors: Vec<TransferMatrix>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or(Error::EmptySet("cocycle factor list"))?;
        let n = first.dim();
        let mut span = first.span();
        for (k, pair) in factors.windows(2).enumerate() {
            if pair[1].dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: pair[1].dim(),
                });
            }
            span = span.extend(&pair[1].span()).map_err(|_| {
                Error::Chain(format!(
                    "factor {} ends at {} but factor {} covers {}",
                    k,
                    pair[0].span().end_point(),
                    k + 1,
                    pair[1].span()
                ))
            })?;
        }
        Ok(Self { n, span, factors })
    }

    /// The empty product on `n` boxes, positioned at `at`.
    pub fn identity(n: usize, at: TimeSpan) -> Self {
        Self {
            n,
            span: at.end_point(),
            factors: Vec::new(),
        }
    }

    pub fn span(&self) -> TimeSpan {
        self.span
    }

    pub fn factors(&self) -> &[TransferMatrix] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn compose(&self) -> DMatrix<f64> {
        let mut acc = DMatrix::identity(self.n, self.n);
        for f in &self.factors {
            acc = f.to_dense() * acc;
        }
        acc
    }
}

impl LinearOperator for Cocycle {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        let mut tmp = vec![0.0; self.n];
        for f in &self.factors {
            f.apply_into(y, &mut tmp);
            y.copy_from_slice(&tmp);
        }
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        let mut tmp = vec![0.0; self.n];
        for f in self.factors.iter().rev() {
            f.apply_transpose_into(y, &mut tmp);
            y.copy_from_slice(&tmp);
        }
    }
}

/// Dense product of consecutive matrices given earliest first.
pub fn compose(factors: &[TransferMatrix]) -> Result<DMatrix<f64>> {
    Ok(Cocycle::new(factors.to_vec())?.compose())
}
