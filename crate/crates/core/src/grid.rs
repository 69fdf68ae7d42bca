//! Uniform box partitions of a circle or cylinder.
//!
//! Boxes are numbered with the first axis varying fastest, so in 2D box
//! `(ix, iy)` has index `iy * nx + ix`. Every box is half-open on its upper
//! faces, except the last box along a non-periodic axis, which also owns the
//! upper boundary. That makes [`Grid::locate`] total on the closed domain.

use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, count: usize, periodic: bool) -> Self {
        Self {
            lower,
            upper,
            count,
            periodic,
        }
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    fn cell(&self, coord: f64) -> Option<usize> {
        if !coord.is_finite() {
            return None;
        }
        let offset = if self.periodic {
            (coord - self.lower).rem_euclid(self.length())
        } else {
            if coord < self.lower || coord > self.upper {
                return None;
            }
            coord - self.lower
        };
        let k = (offset * self.count as f64 / self.length()).floor();
        // rem_euclid may round up to the period itself; the last box is closed.
        Some((k.max(0.0) as usize).min(self.count - 1))
    }

    /// Coordinate of the point a fraction `frac` of the way across cell `k`.
    fn at(&self, k: usize, frac: f64) -> f64 {
        self.lower + (k as f64 + frac) * self.length() / self.count as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Config(format!(
                "grids must be 1D or 2D, got {} axes",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.count == 0 {
                return Err(Error::Config(format!("axis {i} has zero boxes")));
            }
            if !(a.lower.is_finite() && a.upper.is_finite() && a.upper > a.lower) {
                return Err(Error::Config(format!(
                    "axis {i} bounds [{}, {}] are not an interval",
                    a.lower, a.upper
                )));
            }
        }
        Ok(Self { axes })
    }

    /// The circle `[0, 1)` split into `n` equal arcs.
    pub fn circle(n: usize) -> Self {
        Self::new(vec![Axis::new(0.0, 1.0, n, true)]).expect("valid circle grid")
    }

    /// The cylinder `[0, 2π) × [0, π]`, periodic in x and walled in y.
    pub fn cylinder(nx: usize, ny: usize) -> Self {
        Self::new(vec![
            Axis::new(0.0, 2.0 * PI, nx, true),
            Axis::new(0.0, PI, ny, false),
        ])
        .expect("valid cylinder grid")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Total number of boxes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn locate(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let mut index = 0;
        let mut stride = 1;
        for (axis, &c) in self.axes.iter().zip(point) {
            let k = axis
                .cell(c)
                .ok_or_else(|| Error::OutOfDomain(point.to_vec()))?;
            index += k * stride;
            stride *= axis.count;
        }
        Ok(index)
    }

    /// Per-axis cell indices of box `index`.
    pub fn cell_of(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.axes
            .iter()
            .map(|a| {
                let k = rest % a.count;
                rest /= a.count;
                k
            })
            .collect()
    }

    fn index_of(&self, cell: &[usize]) -> usize {
        let mut index = 0;
        let mut stride = 1;
        for (axis, &k) in self.axes.iter().zip(cell) {
            index += k * stride;
            stride *= axis.count;
        }
        index
    }

    pub fn center(&self, index: usize) -> Vec<f64> {
        self.cell_of(index)
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.at(k, 0.5))
            .collect()
    }

    /// Number of lattice points per axis for `q` test points per box.
    pub fn lattice_side(&self, q: usize) -> Result<usize> {
        if q == 0 {
            return Err(Error::Config("the number of test points must be positive".into()));
        }
        match self.dim() {
            1 => Ok(q),
            _ => {
                let side = (q as f64).sqrt().round() as usize;
                if side * side != q {
                    return Err(Error::Config(format!(
                        "2D grids need a square number of test points per box, got {q}"
                    )));
                }
                Ok(side)
            }
        }
    }

    /// Deterministic midpoint lattice of `q` points inside box `index`.
    ///
    /// In 2D the points are ordered with the first axis outermost.
    pub fn test_points(&self, index: usize, q: usize) -> Result<Vec<Vec<f64>>> {
        if index >= self.len() {
            return Err(Error::Precondition(format!(
                "box {index} out of range for a grid of {} boxes",
                self.len()
            )));
        }
        let side = self.lattice_side(q)?;
        let cell = self.cell_of(index);
        let frac = |t: usize| (t as f64 + 0.5) / side as f64;
        Ok(match self.dim() {
            1 => (0..side)
                .map(|t| vec![self.axes[0].at(cell[0], frac(t))])
                .collect(),
            _ => {
                let mut pts = Vec::with_capacity(q);
                for a in 0..side {
                    for b in 0..side {
                        pts.push(vec![
                            self.axes[0].at(cell[0], frac(a)),
                            self.axes[1].at(cell[1], frac(b)),
                        ]);
                    }
                }
                pts
            }
        })
    }

    /// Face neighbours of a box, honouring periodic wraparound.
    pub fn neighbours(&self, index: usize) -> Vec<usize> {
        let cell = self.cell_of(index);
        let mut out = Vec::with_capacity(2 * self.dim());
        for (d, axis) in self.axes.iter().enumerate() {
            let k = cell[d];
            let mut push = |k2: usize| {
                let mut c = cell.clone();
                c[d] = k2;
                let j = self.index_of(&c);
                if j != index && !out.contains(&j) {
                    out.push(j);
                }
            };
            if k > 0 {
                push(k - 1);
            } else if axis.periodic {
                push(axis.count - 1);
            }
            if k + 1 < axis.count {
                push(k + 1);
            } else if axis.periodic {
                push(0);
            }
        }
        out
    }

    /// Maximal face-connected components of `set`, ordered by smallest index.
    pub fn components(&self, set: &BoxSet) -> Vec<BoxSet> {
        let n = self.len();
        let mask = set.mask();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for &start in set.indices() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut members = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for j in self.neighbours(i) {
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        members.push(j);
                        queue.push_back(j);
                    }
                }
            }
            out.push(BoxSet::from_unsorted(n, members));
        }
        out
    }
}

/// A set of boxes of a grid with `n` boxes; indices are sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxSet {
    n: usize,
    indices: Vec<usize>,
}

impl BoxSet {
    pub fn new(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Precondition(format!(
                    "box index {last} out of range for {n} boxes"
                )));
            }
        }
        Ok(Self { n, indices })
    }

    fn from_unsorted(n: usize, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { n, indices }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            indices: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            indices: (0..n).collect(),
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            n: mask.len(),
            indices: mask
                .iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i))
                .collect(),
        }
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Normalised Lebesgue measure; boxes all carry mass `1/n`.
    pub fn measure(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.indices.len() as f64 / self.n as f64
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        let mut v = self.indices.clone();
        v.extend_from_slice(&other.indices);
        BoxSet::from_unsorted(self.n.max(other.n), v)
    }

    pub fn intersection_len(&self, other: &BoxSet) -> usize {
        let m = other.mask();
        self.indices
            .iter()
            .filter(|&&i| m.get(i).copied().unwrap_or(false))
            .count()
    }

    pub fn symmetric_difference_len(&self, other: &BoxSet) -> usize {
        self.len() + other.len() - 2 * self.intersection_len(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn locate_examples() {
        let g = Grid::circle(100);
        assert_eq!(g.locate(&[0.115]).unwrap(), 11);
        assert_eq!(Grid::circle(4).locate(&[1.25]).unwrap(), 1);
        assert_eq!(Grid::circle(4).locate(&[-0.25]).unwrap(), 3);
        let c = Grid::cylinder(4, 4);
        assert_eq!(c.locate(&[0.0, 0.0]).unwrap(), 0);
        // Top wall belongs to the last row.
        assert_eq!(c.locate(&[0.0, PI]).unwrap(), 12);
        assert_eq!(c.locate(&[2.0 * PI, 0.1]).unwrap(), 0);
    }

    #[test]
    fn locate_rejects_points_off_a_wall() {
        let c = Grid::cylinder(4, 4);
        assert!(matches!(c.locate(&[1.0, -1e-9]), Err(Error::OutOfDomain(_))));
        assert!(matches!(c.locate(&[1.0, 3.2]), Err(Error::OutOfDomain(_))));
        assert!(matches!(c.locate(&[f64::NAN, 1.0]), Err(Error::OutOfDomain(_))));
        assert!(matches!(
            c.locate(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn test_point_lattices() {
        let g = Grid::circle(100);
        let pts: Vec<f64> = g.test_points(0, 4).unwrap().into_iter().map(|p| p[0]).collect();
        for (a, b) in pts.iter().zip([0.00125, 0.00375, 0.00625, 0.00875]) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = Grid::new(vec![
            Axis::new(0.0, 1.0, 1, true),
            Axis::new(0.0, 1.0, 1, false),
        ])
        .unwrap();
        let pts = c.test_points(0, 4).unwrap();
        assert_eq!(
            pts,
            vec![
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75]
            ]
        );
        let one = Grid::cylinder(4, 4).test_points(5, 1).unwrap();
        assert_eq!(one, vec![Grid::cylinder(4, 4).center(5)]);
        assert!(matches!(
            Grid::cylinder(4, 4).test_points(0, 3),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn components_examples() {
        let g = Grid::circle(10);
        let wrap = BoxSet::new(10, [0, 1, 9]).unwrap();
        let comps = g.components(&wrap);
        assert_eq!(comps, vec![wrap.clone()]);

        let two = BoxSet::new(10, [1, 2, 5]).unwrap();
        let comps = g.components(&two);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].indices(), &[1, 2]);
        assert_eq!(comps[1].indices(), &[5]);

        let sq = Grid::new(vec![
            Axis::new(0.0, 1.0, 3, false),
            Axis::new(0.0, 1.0, 3, false),
        ])
        .unwrap();
        let diag = BoxSet::new(9, [0, 4, 8]).unwrap();
        assert_eq!(sq.components(&diag).len(), 3);
    }

    #[test]
    fn measure_examples() {
        assert_eq!(BoxSet::full(37).measure(), 1.0);
        assert!((BoxSet::new(100, 0..47).unwrap().measure() - 0.47).abs() < 1e-15);
        assert_eq!(BoxSet::empty(100).measure(), 0.0);
        assert!(BoxSet::new(5, [5]).is_err());
    }

    #[test]
    fn full_set_is_one_component() {
        for g in [Grid::circle(17), Grid::cylinder(6, 5)] {
            let full = BoxSet::full(g.len());
            assert_eq!(g.components(&full).len(), 1);
        }
    }

    proptest! {
        #[test]
        fn test_points_never_leak(nx in 1usize..20, ny in 1usize..12, side in 1usize..6, pick in 0usize..1000) {
            let g = Grid::cylinder(nx, ny);
            let j = pick % g.len();
            for p in g.test_points(j, side * side).unwrap() {
                prop_assert_eq!(g.locate(&p).unwrap(), j);
            }
            let c = Grid::circle(nx * ny);
            for p in c.test_points(j, side).unwrap() {
                prop_assert_eq!(c.locate(&p).unwrap(), j);
            }
        }

        #[test]
        fn measure_is_additive(mask in proptest::collection::vec(0u8..3, 1..80)) {
            let n = mask.len();
            let a = BoxSet::new(n, (0..n).filter(|&i| mask[i] == 1)).unwrap();
            let b = BoxSet::new(n, (0..n).filter(|&i| mask[i] == 2)).unwrap();
            prop_assert!((a.union(&b).measure() - a.measure() - b.measure()).abs() < 1e-12);
        }

        #[test]
        fn components_partition_the_set(mask in proptest::collection::vec(any::<bool>(), 24)) {
            let g = Grid::cylinder(6, 4);
            let set = BoxSet::from_mask(&mask);
            let comps = g.components(&set);
            let total: usize = comps.iter().map(BoxSet::len).sum();
            prop_assert_eq!(total, set.len());
            let mut all = BoxSet::empty(24);
            for c in &comps { all = all.union(c); }
            prop_assert_eq!(all, set);
        }
    }
}
