//! Coherent pairs: a source set now and its best-matching set later.

use crate::coherent::{midpoint, Direction, Levels};
use crate::error::{Error, Result};
use crate::grid::BoxSet;
use crate::transfer::matrix::{rho_hat, TransferMatrix};

/// One feasible source cut in a threshold scan.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    /// Representative threshold on the source vector.
    pub threshold: f64,
    pub measure: f64,
    /// Measure of the matched later set.
    pub matched_measure: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairResult {
    pub direction: Direction,
    /// Midpoint of the threshold range on which the coherence is maximal.
    pub threshold: f64,
    /// Threshold on the later vector selecting the matched set.
    pub matched_threshold: f64,
    pub source: BoxSet,
    pub target: BoxSet,
    pub rho: f64,
    /// Every feasible cut, in order of growing source set.
    pub curve: Vec<CurvePoint>,
}

/// Exact transition counts between a source and a target set that grow
/// as prefixes of fixed box orders.
pub(crate) struct RunningCount<'a> {
    p: &'a TransferMatrix,
    src: Vec<bool>,
    dst: Vec<bool>,
    src_size: usize,
    dst_size: usize,
    count: u64,
}

impl<'a> RunningCount<'a> {
    pub(crate) fn new(p: &'a TransferMatrix) -> Self {
        let n = crate::transfer::LinearOperator::dim(p);
        Self {
            p,
            src: vec![false; n],
            dst: vec![false; n],
            src_size: 0,
            dst_size: 0,
            count: 0,
        }
    }

    /// Move to source `src` and target `dst`. Each must extend the
    /// previous one as a prefix; a shorter prefix restarts the count.
    pub(crate) fn grow(&mut self, src: &[usize], dst: &[usize]) {
        if src.len() < self.src_size || dst.len() < self.dst_size {
            self.src.fill(false);
            self.dst.fill(false);
            self.src_size = 0;
            self.dst_size = 0;
            self.count = 0;
        }
        for &j in &src[self.src_size..] {
            self.src[j] = true;
            self.count += self
                .p
                .column(j)
                .filter(|&(i, _)| self.dst[i])
                .map(|(_, c)| c as u64)
                .sum::<u64>();
        }
        self.src_size = src.len();
        for &i in &dst[self.dst_size..] {
            self.dst[i] = true;
            self.count += self
                .p
                .row(i)
                .filter(|&(j, _)| self.src[j])
                .map(|(_, c)| c as u64)
                .sum::<u64>();
        }
        self.dst_size = dst.len();
    }

    /// Fraction of the source's test points landing in the target.
    pub(crate) fn rho(&self) -> f64 {
        self.count as f64 / (self.p.q() as f64 * self.src_size as f64)
    }
}

/// Scan source thresholds, match each set's measure on the later vector,
/// and keep the pair carrying the largest fraction of mass across `p`.
///
/// Only source sets with measure in `(0, 1/2]` are considered. When the
/// best coherence is attained on a run of adjacent cuts, the threshold
/// is the midpoint of their combined range.
pub fn optimal_pair(
    w_src: &[f64],
    w_dst: &[f64],
    p: &TransferMatrix,
    direction: Direction,
) -> Result<PairResult> {
    let n = crate::transfer::LinearOperator::dim(p);
    if w_src.len() != n || w_dst.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if w_src.len() != n { w_src.len() } else { w_dst.len() },
        });
    }
    let src = Levels::new(w_src, direction)?;
    let dst = Levels::new(w_dst, direction)?;
    let mut running = RunningCount::new(p);
    let mut cuts = Vec::new();
    let mut curve = Vec::new();
    for r in 1..src.cuts() {
        let size = src.size(r);
        if 2 * size > n {
            break;
        }
        let m = dst.closest_size(size as f64);
        running.grow(src.members(r), dst.members(m));
        let rho = running.rho();
        cuts.push((r, m));
        curve.push(CurvePoint {
            threshold: src.threshold(r),
            measure: src.measure(r),
            matched_measure: dst.measure(m),
            rho,
        });
    }
    if cuts.is_empty() {
        return Err(Error::InfeasibleScan);
    }

    let best = curve.iter().map(|c| c.rho).fold(f64::NEG_INFINITY, f64::max);
    let first = curve.iter().position(|c| c.rho >= best - 1e-12).expect("maximum attained");
    let mut last = first;
    while last + 1 < curve.len() && curve[last + 1].rho >= best - 1e-12 {
        last += 1;
    }
    // Cuts grow with r, so the run's score range is [lower of last, upper of first).
    let lo = src.score_interval(cuts[last].0).0;
    let hi = src.score_interval(cuts[first].0).1;
    let t = midpoint(lo, hi);
    let at = cuts[first..=last]
        .iter()
        .position(|&(r, _)| r == src.cut_at_score(t))
        .map_or(first, |k| first + k);
    let (r, m) = cuts[at];
    let source = src.set(r);
    let target = dst.set(m);
    let rho = rho_hat(p, &source, &target)?;
    Ok(PairResult {
        direction,
        threshold: direction.threshold(t),
        matched_threshold: dst.threshold(m),
        source,
        target,
        rho,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::{TimeSpan, TransferMatrix};
    use proptest::prelude::*;

    const UNIT: TimeSpan = TimeSpan::Discrete { start: 0, steps: 1 };

    fn shift(n: usize, by: usize) -> TransferMatrix {
        TransferMatrix::from_columns(n, 1, UNIT, (0..n).map(|j| vec![(((j + by) % n) as u32, 1)]).collect())
            .unwrap()
    }

    #[test]
    fn identity_is_perfectly_coherent() {
        let w = [0.3, -0.2, 0.1, -0.4, 0.25, -0.05];
        let id = TransferMatrix::identity(6, UNIT);
        for d in [Direction::Above, Direction::Below] {
            let r = optimal_pair(&w, &w, &id, d).unwrap();
            assert_eq!(r.rho, 1.0);
            assert_eq!(r.source, r.target);
        }
    }

    #[test]
    fn permutation_aligned_with_sets() {
        let w = [0.4, 0.3, 0.2, -0.1, -0.3, -0.5];
        let later = [-0.5, -0.1, -0.3, 0.4, 0.3, 0.2];
        let r = optimal_pair(&w, &later, &shift(6, 3), Direction::Above).unwrap();
        assert_eq!(r.rho, 1.0);
        // ρ = 1 at sizes 1, 2 and 3, i.e. for every c in [-0.1, 0.4).
        assert_eq!(r.source.indices(), &[0, 1, 2]);
        assert_eq!(r.target.indices(), &[3, 4, 5]);
        assert!((r.threshold - 0.15).abs() < 1e-15);
        let r2 = optimal_pair(&w, &later, &shift(6, 3), Direction::Above).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn infeasible_scan() {
        let id = TransferMatrix::identity(3, UNIT);
        assert!(matches!(
            optimal_pair(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &id, Direction::Above),
            Err(Error::InfeasibleScan)
        ));
    }

    fn random_matrix(n: usize, seed: &[u8]) -> TransferMatrix {
        let cols = (0..n)
            .map(|j| {
                let a = seed[j % seed.len()] as usize;
                vec![(((j + a) % n) as u32, 2), (((j * 7 + a / 3) % n) as u32, 1)]
            })
            .collect();
        TransferMatrix::from_columns(n, 3, UNIT, cols).unwrap()
    }

    proptest! {
        #[test]
        fn reported_rho_is_recomputable(
            a in proptest::collection::vec(-1.0f64..1.0, 12),
            b in proptest::collection::vec(-1.0f64..1.0, 12),
            seed in proptest::collection::vec(0u8..40, 1..6),
        ) {
            let p = random_matrix(12, &seed);
            for d in [Direction::Above, Direction::Below] {
                let r = optimal_pair(&a, &b, &p, d).unwrap();
                prop_assert!((r.rho - rho_hat(&p, &r.source, &r.target).unwrap()).abs() < 1e-12);
                let best = r.curve.iter().map(|c| c.rho).fold(0.0, f64::max);
                prop_assert!((r.rho - best).abs() < 1e-12);
                for c in &r.curve {
                    prop_assert!(c.measure > 0.0 && c.measure <= 0.5);
                }
            }
        }

        #[test]
        fn positive_scaling_changes_nothing(
            a in proptest::collection::vec(-1.0f64..1.0, 10),
            b in proptest::collection::vec(-1.0f64..1.0, 10),
            k in -6i32..6,
        ) {
            let p = random_matrix(10, &[3, 11, 5]);
            let s = 2f64.powi(k);
            let sa: Vec<f64> = a.iter().map(|x| x * s).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * s).collect();
            let r = optimal_pair(&a, &b, &p, Direction::Above).unwrap();
            let t = optimal_pair(&sa, &sb, &p, Direction::Above).unwrap();
            prop_assert_eq!(&r.source, &t.source);
            prop_assert_eq!(&r.target, &t.target);
            prop_assert_eq!(r.rho, t.rho);
        }

        #[test]
        fn negation_flips_direction(
            a in proptest::collection::vec(-1.0f64..1.0, 10),
            b in proptest::collection::vec(-1.0f64..1.0, 10),
        ) {
            let p = random_matrix(10, &[1, 2]);
            let na: Vec<f64> = a.iter().map(|x| -x).collect();
            let nb: Vec<f64> = b.iter().map(|x| -x).collect();
            for d in [Direction::Above, Direction::Below] {
                let r = optimal_pair(&a, &b, &p, d).unwrap();
                let t = optimal_pair(&na, &nb, &p, d.flip()).unwrap();
                prop_assert_eq!(&r.source, &t.source);
                prop_assert_eq!(&r.target, &t.target);
                prop_assert_eq!(r.threshold, -t.threshold);
            }
        }
    }
}
