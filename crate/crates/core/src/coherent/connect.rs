//! Replace a disconnected one-dimensional set by the closest interval.

use crate::error::{Error, Result};
use crate::grid::{BoxSet, Grid};

/// The interval of the same box count closest to `set` in symmetric
/// difference. A connected set is returned unchanged.
///
/// Candidates are scanned from the first box of the lowest-indexed
/// component, in increasing (circular) order, and the first minimum
/// wins. Only one-dimensional grids are supported.
pub fn connectify(grid: &Grid, set: &BoxSet) -> Result<BoxSet> {
    if grid.dim() != 1 {
        return Err(Error::Precondition(
            "interval repair is only defined on one-dimensional grids".into(),
        ));
    }
    if set.grid_len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: set.grid_len(),
        });
    }
    if set.is_empty() {
        return Err(Error::EmptySet("set to connect"));
    }
    let components = grid.components(set);
    if components.len() == 1 {
        return Ok(set.clone());
    }
    let n = grid.len();
    let size = set.len();
    let periodic = grid.axes()[0].periodic;
    let mask = set.mask();

    let first = set.indices()[0];
    let start = if periodic {
        let comp = components
            .iter()
            .find(|c| c.contains(first))
            .expect("every box lies in a component");
        *comp
            .indices()
            .iter()
            .find(|&&i| !comp.contains((i + n - 1) % n))
            .expect("a proper subset of the circle has a first box")
    } else {
        first
    };

    let candidates: Vec<usize> = if periodic {
        (0..n).map(|k| (start + k) % n).collect()
    } else {
        (start..=n - size).chain(0..start.min(n - size + 1)).collect()
    };
    let mut best: Option<(usize, usize)> = None;
    for a in candidates {
        let inside = (0..size).filter(|&k| mask[(a + k) % n]).count();
        let diff = 2 * (size - inside);
        if best.is_none_or(|(_, d)| diff < d) {
            best = Some((a, diff));
        }
    }
    let (a, _) = best.expect("at least one candidate interval");
    BoxSet::new(n, (0..size).map(|k| (a + k) % n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize, lo: usize, hi: usize) -> BoxSet {
        BoxSet::new(n, lo..=hi).unwrap()
    }

    #[test]
    fn small_stray_component_is_absorbed() {
        let g = Grid::circle(100);
        let set = BoxSet::new(100, (12..=57).chain([60])).unwrap();
        assert_eq!(connectify(&g, &set).unwrap(), interval(100, 12, 58));
    }

    #[test]
    fn connected_sets_are_unchanged() {
        let g = Grid::circle(10);
        let wrap = BoxSet::new(10, [9, 0, 1]).unwrap();
        assert_eq!(connectify(&g, &wrap).unwrap(), wrap);
        assert!(connectify(&g, &BoxSet::empty(10)).is_err());
        assert!(connectify(&Grid::cylinder(4, 2), &BoxSet::full(8)).is_err());
    }

    #[test]
    fn equal_components_prefer_the_lower() {
        let g = Grid::circle(40);
        let set = BoxSet::new(40, (5..8).chain(25..28)).unwrap();
        let got = connectify(&g, &set).unwrap();
        assert_eq!(got, interval(40, 5, 10));

        // Exhaustive oracle: every interval of six boxes, distances only.
        let best = (0..40)
            .map(|a| BoxSet::new(40, (0..6).map(|k| (a + k) % 40)).unwrap())
            .map(|c| c.symmetric_difference_len(&set))
            .min()
            .unwrap();
        assert_eq!(got.symmetric_difference_len(&set), best);
    }

    #[test]
    fn wrapped_components_keep_their_start() {
        let g = Grid::circle(20);
        let set = BoxSet::new(20, [18, 19, 0, 1, 5]).unwrap();
        assert_eq!(connectify(&g, &set).unwrap(), BoxSet::new(20, [18, 19, 0, 1, 2]).unwrap());
    }
}
