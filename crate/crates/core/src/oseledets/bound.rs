//! Decay of the positive part of a zero-mean density.

use crate::error::{Error, Result};
use crate::transfer::operator::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    /// `‖P f⁺ − (P f)⁺‖₁`
    pub lhs: f64,
    /// `(1 − ‖P f‖₁) / 2`
    pub rhs: f64,
    pub pass: bool,
}

fn positive(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.max(0.0)).collect()
}

/// Check `‖P f⁺ − (P f)⁺‖₁ ≤ (1 − ‖P f‖₁)/2` for a zero-sum, unit 1-norm
/// `f` and a mass-preserving `P`.
pub fn positive_part_bound<O: LinearOperator + ?Sized>(p: &O, f: &[f64]) -> Result<BoundCheck> {
    let n = p.dim();
    let sum: f64 = f.iter().sum();
    let mass: f64 = f.iter().map(|x| x.abs()).sum();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    if sum.abs() > 1e-9 || (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "f must have zero sum and unit 1-norm (sum {sum:e}, norm {mass})"
        )));
    }
    let total: f64 = p.apply(&vec![1.0; n])?.iter().sum();
    if (total - n as f64).abs() > 1e-9 * n as f64 {
        return Err(Error::Precondition("operator does not preserve mass".into()));
    }
    let pf = p.apply(f)?;
    let pf_plus = p.apply(&positive(f))?;
    let lhs = pf_plus
        .iter()
        .zip(positive(&pf))
        .map(|(a, b)| (a - b).abs())
        .sum();
    let rhs = (1.0 - pf.iter().map(|x| x.abs()).sum::<f64>()) / 2.0;
    Ok(BoundCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-10,
    })
}
