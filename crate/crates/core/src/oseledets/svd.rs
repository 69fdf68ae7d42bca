//! Leading singular triples.
//!
//! [`top_k_singular`] runs block orthogonal iteration on `v ↦ Aᵀ(A v)`
//! without forming either product, alternating between orthonormal bases
//! of `A V` and `Aᵀ U`. Each sweep ends with a Rayleigh–Ritz step, which
//! takes the SVD of the tall block `A V` by one-sided Jacobi ([`jacobi_svd`]).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::operator::LinearOperator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdOptions {
    /// Stop once no leading subspace rotates by more than this per sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Extra block columns beyond the requested `k`.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 5000,
            oversample: 2,
            seed: 0x5eed,
        }
    }
}

/// Leading singular values (descending) and right singular vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    pub singular_values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
    pub residual: f64,
}

impl SpectralResult {
    /// Per-unit-time growth `σ_j^{1/duration}`.
    pub fn amplitudes(&self, duration: f64) -> Vec<f64> {
        self.singular_values
            .iter()
            .map(|s| s.powf(1.0 / duration))
            .collect()
    }

    /// Largest deviation of the Gram matrix of the vectors from identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, u) in self.vectors.iter().enumerate() {
            for (b, v) in self.vectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, v) - want).abs());
            }
        }
        worst
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flip `v` so that its largest-magnitude entry is positive. Entries
/// within a relative `1e-9` of the maximum count as ties; the first wins.
pub fn sign_convention(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .expect("maximum exists");
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Thin SVD `A = U diag(s) Vᵀ` by one-sided Jacobi rotations on the
/// columns of `A`, with singular values in descending order.
#[derive(Clone, Debug)]
pub struct DenseSvd {
    /// Left vectors as columns; zero where the singular value is zero.
    pub u: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    /// Right vectors as columns.
    pub v: Vec<Vec<f64>>,
    pub sweeps: usize,
}

pub fn jacobi_svd(a: &DMatrix<f64>) -> Result<DenseSvd> {
    let cols: Vec<Vec<f64>> = (0..a.ncols()).map(|j| a.column(j).iter().copied().collect()).collect();
    jacobi_svd_columns(cols)
}

/// [`jacobi_svd`] for a matrix given as a list of columns.
pub fn jacobi_svd_columns(mut cols: Vec<Vec<f64>>) -> Result<DenseSvd> {
    const MAX_SWEEPS: usize = 80;
    let n = cols.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    // Columns this small are rounding noise; rotating them never settles.
    let negligible = cols.iter().map(|c| dot(c, c)).sum::<f64>() * f64::EPSILON * f64::EPSILON;
    // Inner products of long columns carry rounding error growing with
    // their length, so orthogonality is only decidable to this level.
    let rows = cols.first().map_or(0, Vec::len);
    let orthogonal = rows.max(1) as f64 * f64::EPSILON;
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0
                    || alpha.min(beta) <= negligible
                    || gamma.abs() <= orthogonal * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: f64::NAN,
            });
        }
    }
    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let s: Vec<f64> = order.iter().map(|o| o.0).collect();
    let u = order
        .iter()
        .map(|&(sigma, j)| {
            if sigma > 0.0 {
                cols[j].iter().map(|x| x / sigma).collect()
            } else {
                vec![0.0; cols[j].len()]
            }
        })
        .collect();
    let v = order.iter().map(|&(_, j)| v[j].clone()).collect();
    Ok(DenseSvd { u, s, v, sweeps })
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (a, b) = (&mut lo[p], &mut hi[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Leading `k` singular triples of a dense matrix via [`jacobi_svd`].
pub fn top_k_singular_dense(a: &DMatrix<f64>, k: usize) -> Result<SpectralResult> {
    check_k(a.ncols(), k)?;
    let svd = jacobi_svd(a)?;
    let mut vectors: Vec<Vec<f64>> = svd.v.into_iter().take(k).collect();
    vectors.iter_mut().for_each(|v| sign_convention(v));
    Ok(SpectralResult {
        singular_values: svd.s[..k].to_vec(),
        vectors,
        sweeps: svd.sweeps,
        residual: 0.0,
    })
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "cannot take {k} singular vectors of a {n}-dimensional operator"
        )));
    }
    Ok(())
}

/// Orthonormalise columns in place by modified Gram–Schmidt applied twice.
/// Columns that collapse are replaced by random directions.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = norm(&cols[j]);
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let c = dot(&done[i], &rest[0]);
                    rest[0].iter_mut().zip(&done[i]).for_each(|(x, y)| *x -= c * y);
                }
            }
            let after = norm(&cols[j]);
            if after > 1e-10 * before.max(f64::MIN_POSITIVE) && after > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= after);
                break;
            }
            attempts += 1;
            assert!(attempts < 100, "cannot complete an orthonormal basis");
            cols[j].iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        }
    }
}

/// Subspace rotation between consecutive Ritz bases: the largest, over
/// `j ≤ k`, of `‖(I − V_j V_jᵀ) W_j‖_F` for the leading `j` columns.
fn rotation(new: &[Vec<f64>], old: &[Vec<f64>]) -> f64 {
    let k = new.len();
    let mut worst: f64 = 0.0;
    for j in 1..=k {
        let mut total = 0.0;
        for w in &old[..j] {
            let mut r = w.clone();
            for v in &new[..j] {
                let c = dot(v, w);
                r.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
            total += dot(&r, &r);
        }
        worst = worst.max(total.sqrt());
    }
    worst
}

/// Leading `k` singular values and right singular vectors of `op`.
pub fn top_k_singular<O: LinearOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &SvdOptions,
) -> Result<SpectralResult> {
    let n = op.dim();
    check_k(n, k)?;
    let b = (k + opts.oversample).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis, &mut rng);

    let mut previous: Option<Vec<Vec<f64>>> = None;
    let mut residual = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        // Rayleigh–Ritz on span(basis): SVD of A·basis.
        let image: Vec<Vec<f64>> = basis
            .iter()
            .map(|v| {
                let mut y = vec![0.0; n];
                op.apply_into(v, &mut y);
                y
            })
            .collect();
        let small = jacobi_svd_columns(image)?;
        let ritz: Vec<Vec<f64>> = small
            .v
            .iter()
            .map(|w| {
                let mut x = vec![0.0; n];
                for (c, v) in w.iter().zip(&basis) {
                    x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
                }
                x
            })
            .collect();
        let lead: Vec<Vec<f64>> = ritz[..k].to_vec();
        if let Some(prev) = &previous {
            residual = rotation(&lead, prev);
            if residual < opts.tol {
                let mut vectors = lead;
                vectors.iter_mut().for_each(|v| sign_convention(v));
                return Ok(SpectralResult {
                    singular_values: small.s[..k].to_vec(),
                    vectors,
                    sweeps: sweep,
                    residual,
                });
            }
        }
        previous = Some(lead);

        // Next basis: Aᵀ applied to the left Ritz vectors. Directions with
        // zero singular value keep their Ritz vector.
        let scale = small.s[0];
        basis = small
            .u
            .iter()
            .zip(&small.s)
            .zip(&ritz)
            .map(|((u, &s), r)| {
                if s > 1e-14 * scale {
                    let mut z = vec![0.0; n];
                    op.apply_transpose_into(u, &mut z);
                    z
                } else {
                    r.clone()
                }
            })
            .collect();
        orthonormalize(&mut basis, &mut rng);
    }
    Err(Error::NoConvergence {
        sweeps: opts.max_sweeps,
        residual,
    })
}
