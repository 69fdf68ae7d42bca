//! Coherent sets as superlevel sets of approximate Oseledets vectors.
//!
//! A vector `w` and a [`Direction`] give a score per box (`w` or `-w`).
//! Thresholding the score can only produce the nested sets of [`Levels`];
//! every scan below works on those cuts directly.

mod connect;
mod pair;
mod sequence;

pub use connect::connectify;
pub use pair::{optimal_pair, CurvePoint, PairResult};
pub use sequence::{optimal_sequence, CoherentFamily, FamilyMember};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BoxSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Boxes with `w > c`.
    Above,
    /// Boxes with `w < c`.
    Below,
}

impl Direction {
    pub fn score(self, w: f64) -> f64 {
        match self {
            Direction::Above => w,
            Direction::Below => -w,
        }
    }

    /// Convert a score threshold back to a threshold on `w`.
    pub fn threshold(self, t: f64) -> f64 {
        self.score(t)
    }

    pub fn sign(self) -> char {
        match self {
            Direction::Above => '+',
            Direction::Below => '-',
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Above => Direction::Below,
            Direction::Below => Direction::Above,
        }
    }
}

/// Boxes strictly above (or below) `c`.
pub fn threshold_set(w: &[f64], c: f64, direction: Direction) -> BoxSet {
    BoxSet::from_mask(
        &w.iter()
            .map(|&x| match direction {
                Direction::Above => x > c,
                Direction::Below => x < c,
            })
            .collect::<Vec<_>>(),
    )
}

/// The distinct superlevel sets of a score vector.
///
/// With distinct scores `u_0 > u_1 > … > u_{m-1}`, cut `r` (for
/// `r = 0..=m`) holds the boxes scoring at least `u_{r-1}`; every score
/// threshold in `[u_r, u_{r-1})` selects exactly that set.
#[derive(Clone, Debug)]
pub struct Levels {
    direction: Direction,
    /// Boxes by descending score, ties by index.
    order: Vec<usize>,
    values: Vec<f64>,
    /// `sizes[r]` is the number of boxes in cut `r`.
    sizes: Vec<usize>,
}

impl Levels {
    pub fn new(w: &[f64], direction: Direction) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptySet("mode vector"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("mode vector has non-finite entries".into()));
        }
        let mut order: Vec<usize> = (0..w.len()).collect();
        let s = |i: usize| direction.score(w[i]);
        order.sort_by(|&a, &b| s(b).total_cmp(&s(a)).then(a.cmp(&b)));
        let mut values = Vec::new();
        let mut sizes = vec![0];
        for (pos, &i) in order.iter().enumerate() {
            if values.last() != Some(&s(i)) {
                if !values.is_empty() {
                    sizes.push(pos);
                }
                values.push(s(i));
            }
        }
        sizes.push(w.len());
        Ok(Self {
            direction,
            order,
            values,
            sizes,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn grid_len(&self) -> usize {
        self.order.len()
    }

    /// Number of cuts, `m + 1`.
    pub fn cuts(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, r: usize) -> usize {
        self.sizes[r]
    }

    pub fn measure(&self, r: usize) -> f64 {
        self.sizes[r] as f64 / self.grid_len() as f64
    }

    /// Boxes of cut `r` in score order.
    pub fn members(&self, r: usize) -> &[usize] {
        &self.order[..self.sizes[r]]
    }

    pub fn set(&self, r: usize) -> BoxSet {
        BoxSet::new(self.grid_len(), self.members(r).iter().copied()).expect("indices in range")
    }

    /// Score interval `[lower, upper)` of thresholds selecting cut `r`.
    pub fn score_interval(&self, r: usize) -> (f64, f64) {
        let lower = self.values.get(r).copied().unwrap_or(f64::NEG_INFINITY);
        let upper = if r == 0 { f64::INFINITY } else { self.values[r - 1] };
        (lower, upper)
    }

    /// A representative threshold on `w` for cut `r`: the midpoint of its
    /// interval, or a value just outside the data when it is unbounded.
    pub fn threshold(&self, r: usize) -> f64 {
        let (lo, hi) = self.score_interval(r);
        self.direction.threshold(midpoint(lo, hi))
    }

    /// The cut whose interval contains score threshold `t`.
    pub fn cut_at_score(&self, t: f64) -> usize {
        // Number of distinct values strictly above t.
        self.values.partition_point(|&u| u > t)
    }

    /// The cut whose size is closest to `target` boxes; ties go to the
    /// smaller set.
    pub fn closest_size(&self, target: f64) -> usize {
        let mut best = 0;
        for r in 1..self.cuts() {
            if (self.sizes[r] as f64 - target).abs() < (self.sizes[best] as f64 - target).abs() {
                best = r;
            }
        }
        best
    }
}

pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        // Strictly below the smallest score, so the cut keeps every box.
        (false, true) => hi - hi.abs().max(f64::MIN_POSITIVE),
        (false, false) => 0.0,
    }
}

/// Threshold on `w` whose set best matches `target` measure, with the set
/// itself. Ties go to the smaller set.
pub fn eta_match(w: &[f64], target: f64, direction: Direction) -> Result<(f64, BoxSet)> {
    if !(target > 0.0 && target <= 0.5) {
        return Err(Error::Precondition(format!(
            "target measure {target} must lie in (0, 1/2]"
        )));
    }
    let levels = Levels::new(w, direction)?;
    let r = levels.closest_size(target * w.len() as f64);
    Ok((levels.threshold(r), levels.set(r)))
}
