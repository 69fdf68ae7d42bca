//! Eigenvalues and eigenvectors of small dense nonsymmetric matrices.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::oseledets::approx::normalize_l1;
use crate::oseledets::svd::{jacobi_svd, sign_convention};

/// Eigenvalues with modulus above `cutoff`, largest modulus first (ties
/// by larger real part, then larger imaginary part).
pub fn nonzero_eigenvalues(m: &DMatrix<f64>, cutoff: f64) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let mut ev: Vec<Complex<f64>> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .copied()
        .filter(|z| z.norm() > cutoff)
        .collect();
    ev.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    Ok(ev)
}

/// Unit 1-norm eigenvector for the real eigenvalue `lambda`, taken as the
/// right singular vector of `m - λI` with the smallest singular value.
pub fn eigenvector(m: &DMatrix<f64>, lambda: f64) -> Result<Vec<f64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = jacobi_svd(&shifted)?;
    let smallest = svd.s[n - 1];
    if smallest > 1e-8 * svd.s[0].max(1.0) {
        return Err(Error::Precondition(format!(
            "{lambda} is not an eigenvalue (smallest singular value {smallest:e})"
        )));
    }
    let mut v = svd.v[n - 1].clone();
    sign_convention(&mut v);
    normalize_l1(&mut v)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::matrix::tests::markov_single;

    #[test]
    fn single_map_spectrum() {
        let p = markov_single().to_dense();
        let ev = nonzero_eigenvalues(&p, 1e-6).unwrap();
        let want = [1.0, (1.0 + 2f64.sqrt()) / 3.0, (1.0 - 2f64.sqrt()) / 3.0];
        assert_eq!(ev.len(), 3);
        for (z, w) in ev.iter().zip(want) {
            assert!((z.re - w).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
        let f2 = eigenvector(&p, want[1]).unwrap();
        let positive: Vec<usize> = (0..6).filter(|&i| f2[i] > 0.0).collect();
        assert_eq!(positive, vec![0, 1, 2]);
        let pf = crate::transfer::LinearOperator::apply(&p, &f2).unwrap();
        for (a, b) in pf.iter().zip(&f2) {
            assert!((a - want[1] * b).abs() < 1e-12);
        }
        assert!(eigenvector(&p, 0.5).is_err());
    }

    #[test]
    fn rotations_have_complex_pairs() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = nonzero_eigenvalues(&r, 1e-6).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0].im - 1.0).abs() < 1e-12 && (ev[1].im + 1.0).abs() < 1e-12);
    }
}
