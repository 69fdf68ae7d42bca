//! Families of equal-measure coherent sets along a sequence of times.

use crate::coherent::pair::RunningCount;
use crate::coherent::{connectify, Direction, Levels};
use crate::error::{Error, Result};
use crate::grid::{BoxSet, Grid};
use crate::transfer::matrix::{rho_hat, TransferMatrix};
use crate::transfer::LinearOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyMember {
    /// Threshold on the mode vector selecting `raw`.
    pub threshold: f64,
    /// The superlevel set before any repair.
    pub raw: BoxSet,
    /// The reported set: the repaired interval in 1D, `raw` in 2D.
    pub set: BoxSet,
    /// Number of connected components of `raw`.
    pub components: usize,
    /// Coherence from this set to the next one; `None` for the last time.
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentFamily {
    pub direction: Direction,
    /// Common measure of the sets.
    pub level: f64,
    /// Mean coherence of the raw superlevel sets at `level`.
    pub mean_rho: f64,
    /// Mean coherence of the reported sets.
    pub mean_rho_connected: f64,
    pub members: Vec<FamilyMember>,
    /// `(level, mean coherence)` for every scanned level.
    pub curve: Vec<(f64, f64)>,
}

/// Choose the common measure maximizing the mean coherence of the
/// superlevel sets of `ws[0..=K]` across the steps `ps[0..K]`.
///
/// Levels `j/n` for `j = 1..=n/2` are scanned; at each, every vector
/// contributes the cut whose size is closest to `j` boxes. The first
/// maximizing level wins. On 1D grids the chosen sets are then replaced
/// by intervals and the coherences recomputed.
pub fn optimal_sequence(
    ws: &[Vec<f64>],
    ps: &[TransferMatrix],
    grid: &Grid,
    direction: Direction,
) -> Result<CoherentFamily> {
    if ps.is_empty() || ws.len() != ps.len() + 1 {
        return Err(Error::Precondition(format!(
            "need K >= 1 steps and K + 1 vectors, got {} steps and {} vectors",
            ps.len(),
            ws.len()
        )));
    }
    let n = grid.len();
    for p in ps {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
        }
    }
    let levels = ws
        .iter()
        .map(|w| {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
            Levels::new(w, direction)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut running: Vec<RunningCount> = ps.iter().map(RunningCount::new).collect();
    let mut curve = Vec::with_capacity(n / 2);
    for j in 1..=n / 2 {
        let cuts: Vec<usize> = levels.iter().map(|l| l.closest_size(j as f64)).collect();
        if cuts.iter().zip(&levels).any(|(&r, l)| l.size(r) == 0) {
            curve.push((j as f64 / n as f64, f64::NAN));
            continue;
        }
        let mut total = 0.0;
        for (k, rc) in running.iter_mut().enumerate() {
            rc.grow(levels[k].members(cuts[k]), levels[k + 1].members(cuts[k + 1]));
            total += rc.rho();
        }
        curve.push((j as f64 / n as f64, total / ps.len() as f64));
    }
    let (best, _) = curve
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.1.is_nan())
        .fold(None, |acc: Option<(usize, f64)>, (i, c)| match acc {
            Some((_, m)) if c.1 <= m => acc,
            _ => Some((i, c.1)),
        })
        .ok_or(Error::InfeasibleScan)?;
    let (level, mean_rho) = curve[best];

    let target = (best + 1) as f64;
    let mut members = Vec::with_capacity(ws.len());
    for l in &levels {
        let r = l.closest_size(target);
        let raw = l.set(r);
        let components = grid.components(&raw).len();
        let set = if grid.dim() == 1 { connectify(grid, &raw)? } else { raw.clone() };
        members.push(FamilyMember {
            threshold: l.threshold(r),
            raw,
            set,
            components,
            rho: None,
        });
    }
    let mut total = 0.0;
    for (k, p) in ps.iter().enumerate() {
        let rho = rho_hat(p, &members[k].set, &members[k + 1].set)?;
        members[k].rho = Some(rho);
        total += rho;
    }
    Ok(CoherentFamily {
        direction,
        level,
        mean_rho,
        mean_rho_connected: total / ps.len() as f64,
        members,
        curve,
    })
}
