//! Pushed-forward singular vectors as approximate Oseledets directions.

use crate::error::{Error, Result};
use crate::oseledets::svd::{dot, sign_convention, top_k_singular, SpectralResult, SvdOptions};
use crate::systems::symbols::SymbolSequence;
use crate::transfer::operator::LinearOperator;
use crate::transfer::ulam::FamilyMatrices;

/// Scale `v` to unit 1-norm.
pub fn normalize_l1(v: &mut [f64]) -> Result<()> {
    let s: f64 = v.iter().map(|x| x.abs()).sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Precondition("cannot normalise a zero or non-finite vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// Flip `v` if it points away from `reference`. Returns whether it flipped.
pub fn align_parity(v: &mut [f64], reference: &[f64]) -> bool {
    if dot(v, reference) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

/// `min(‖a − b‖₁, ‖a + b‖₁)`
pub fn l1_distance_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).abs()).sum();
    minus.min(plus)
}

/// Approximate Oseledets vectors at a reference time and at later
/// checkpoints reached by pushing forward one factor at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct OseledetsApprox {
    pub spectrum: SpectralResult,
    /// `σ_j^{1/M}`
    pub amplitudes: Vec<f64>,
    /// Length `M` of the product whose singular vectors seed the vectors.
    pub long_duration: f64,
    /// Length `N` of the push-forward to the reference time.
    pub push_duration: f64,
    /// `checkpoints[t][j]` is mode `j` at checkpoint `t`; checkpoint 0 is
    /// the reference time. Every vector has unit 1-norm.
    pub checkpoints: Vec<Vec<Vec<f64>>>,
}

impl OseledetsApprox {
    /// Seed from the singular vectors of `long` (duration `m`) and push
    /// them to the reference time with `push` (duration `n`).
    pub fn build<A, B>(
        long: &A,
        m: f64,
        push: &B,
        n: f64,
        k: usize,
        opts: &SvdOptions,
    ) -> Result<Self>
    where
        A: LinearOperator + ?Sized,
        B: LinearOperator + ?Sized,
    {
        if push.dim() != long.dim() {
            return Err(Error::DimensionMismatch {
                expected: long.dim(),
                got: push.dim(),
            });
        }
        if !(m > 0.0 && n >= 0.0 && m >= n) {
            return Err(Error::Precondition(format!(
                "need M >= N >= 0 and M > 0, got M = {m}, N = {n}"
            )));
        }
        let spectrum = top_k_singular(long, k, opts)?;
        let first = spectrum
            .vectors
            .iter()
            .map(|u| {
                let mut w = push.apply(u)?;
                normalize_l1(&mut w)?;
                sign_convention(&mut w);
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            amplitudes: spectrum.amplitudes(m),
            spectrum,
            long_duration: m,
            push_duration: n,
            checkpoints: vec![first],
        })
    }

    /// Append the checkpoint reached by applying `step` to the last one.
    /// Parity follows the push-forward.
    pub fn extend<C: LinearOperator + ?Sized>(&mut self, step: &C) -> Result<()> {
        let last = self.checkpoints.last().expect("at least one checkpoint");
        let next = last
            .iter()
            .map(|w| {
                let mut pushed = step.apply(w)?;
                normalize_l1(&mut pushed)?;
                let mut stored = pushed.clone();
                sign_convention(&mut stored);
                align_parity(&mut stored, &pushed);
                Ok(stored)
            })
            .collect::<Result<Vec<_>>>()?;
        self.checkpoints.push(next);
        Ok(())
    }

    pub fn vector(&self, checkpoint: usize, mode: usize) -> &[f64] {
        &self.checkpoints[checkpoint][mode]
    }

    /// Mode `mode` at every checkpoint.
    pub fn mode(&self, mode: usize) -> Vec<Vec<f64>> {
        self.checkpoints.iter().map(|c| c[mode].clone()).collect()
    }
}

/// Oseledets approximation for a symbol-driven map cocycle with reference
/// index `anchor`: seeds from the `m`-step product starting at
/// `anchor - n`, then adds `after` checkpoints `anchor + 1, …`.
#[allow(clippy::too_many_arguments)]
pub fn discrete_approx(
    cache: &FamilyMatrices,
    symbols: &SymbolSequence,
    anchor: i64,
    m: usize,
    n: usize,
    k: usize,
    after: usize,
    opts: &SvdOptions,
) -> Result<OseledetsApprox> {
    let start = anchor - n as i64;
    let long = cache.cocycle(symbols, start, m)?;
    let push = cache.cocycle(symbols, start, n)?;
    let mut approx = OseledetsApprox::build(&long, m as f64, &push, n as f64, k, opts)?;
    for t in 0..after {
        approx.extend(&cache.step(symbols, anchor + t as i64)?)?;
    }
    Ok(approx)
}

/// `Δ(N)`: 1-norm gap, up to sign, between mode `mode` computed
/// independently at index 1 and mode `mode` at index 0 pushed one step,
/// using `(M, N) = (2N, N)`.
pub fn convergence_delta(
    cache: &FamilyMatrices,
    symbols: &SymbolSequence,
    ns: impl IntoIterator<Item = usize>,
    mode: usize,
    opts: &SvdOptions,
) -> Result<Vec<(usize, f64)>> {
    ns.into_iter()
        .map(|n| {
            if n == 0 {
                return Err(Error::Precondition("Δ(N) needs N >= 1".into()));
            }
            let here = discrete_approx(cache, symbols, 0, 2 * n, n, mode + 1, 1, opts)?;
            let next = discrete_approx(cache, symbols, 1, 2 * n, n, mode + 1, 0, opts)?;
            Ok((n, l1_distance_up_to_sign(here.vector(1, mode), next.vector(0, mode))))
        })
        .collect()
}
