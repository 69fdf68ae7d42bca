//! Ulam matrices: count where each box's test points land.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parallel::map_range;
use crate::systems::flow::{DrivingPath, FlowSystem};
use crate::systems::maps::{CircleMap, MapFamily};
use crate::systems::symbols::SymbolSequence;
use crate::transfer::cocycle::Cocycle;
use crate::transfer::operator::LinearOperator;
use crate::transfer::matrix::{TimeSpan, TransferMatrix};

/// Tally a list of destination boxes into `(row, count)` pairs.
fn tally(mut hits: Vec<u32>) -> Vec<(u32, u32)> {
    hits.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::new();
    for h in hits {
        match out.last_mut() {
            Some(last) if last.0 == h => last.1 += 1,
            _ => out.push((h, 1)),
        }
    }
    out
}

fn test_count(q: usize) -> Result<u32> {
    u32::try_from(q)
        .ok()
        .filter(|&q| q > 0)
        .ok_or_else(|| Error::Config(format!("test point count {q} out of range")))
}

/// Ulam matrix of a circle map on a one-dimensional grid.
pub fn ulam_map<M: CircleMap + ?Sized>(
    grid: &Grid,
    map: &M,
    q: usize,
    span: TimeSpan,
) -> Result<TransferMatrix> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    let qc = test_count(q)?;
    let columns = map_range(grid.len(), |j| -> Result<Vec<(u32, u32)>> {
        let mut hits = Vec::with_capacity(q);
        for p in grid.test_points(j, q)? {
            hits.push(grid.locate(&[map.apply(p[0])])? as u32);
        }
        Ok(tally(hits))
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    TransferMatrix::from_columns(grid.len(), qc, span, columns)
}

/// Ulam matrix of the family member selected by `symbol`, labelled as
/// the single step starting at symbol index `index`.
pub fn ulam_family(
    grid: &Grid,
    family: &MapFamily,
    symbol: u8,
    q: usize,
    index: i64,
) -> Result<TransferMatrix> {
    let map = family.map(symbol)?;
    ulam_map(grid, &map, q, TimeSpan::Discrete { start: index, steps: 1 })
}

/// One Ulam matrix per symbol of a map family, relabelled on demand for
/// any position of a driving sequence.
#[derive(Clone, Debug)]
pub struct FamilyMatrices {
    by_symbol: Vec<TransferMatrix>,
}

impl FamilyMatrices {
    pub fn new(grid: &Grid, family: &MapFamily, q: usize) -> Result<Self> {
        let by_symbol = (1..=family.symbol_count())
            .map(|s| ulam_family(grid, family, s, q, 0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { by_symbol })
    }

    pub fn for_symbol(&self, symbol: u8) -> Result<&TransferMatrix> {
        symbol
            .checked_sub(1)
            .and_then(|s| self.by_symbol.get(s as usize))
            .ok_or_else(|| Error::Precondition(format!("no matrix for symbol {symbol}")))
    }

    /// `P(ω_k)`, the single step starting at index `k`.
    pub fn step(&self, symbols: &SymbolSequence, k: i64) -> Result<TransferMatrix> {
        Ok(self
            .for_symbol(symbols.get(k)?)?
            .with_span(TimeSpan::Discrete { start: k, steps: 1 }))
    }

    /// The `len` steps starting at index `start`, as an unevaluated product.
    pub fn cocycle(&self, symbols: &SymbolSequence, start: i64, len: usize) -> Result<Cocycle> {
        if len == 0 {
            let n = self.by_symbol[0].dim();
            return Ok(Cocycle::identity(n, TimeSpan::Discrete { start: start - 1, steps: 1 }));
        }
        let factors = (start..start + len as i64)
            .map(|k| self.step(symbols, k))
            .collect::<Result<Vec<_>>>()?;
        Cocycle::new(factors)
    }
}

/// Ulam matrices of the driven flow started at driving time `start`, one
/// for each elapsed time in `snapshots`. Each particle is integrated once
/// through all snapshots.
pub fn ulam_flow_snapshots(
    grid: &Grid,
    system: &FlowSystem,
    start: f64,
    snapshots: &[f64],
    q: usize,
) -> Result<Vec<TransferMatrix>> {
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    let qc = test_count(q)?;
    grid.lattice_side(q)?;
    let path = DrivingPath::new(system, start, snapshots)?;
    let k = snapshots.len();
    let columns = map_range(grid.len(), |j| -> Result<Vec<Vec<(u32, u32)>>> {
        let mut hits = vec![Vec::with_capacity(q); k];
        for p in grid.test_points(j, q)? {
            for (s, (x, y)) in path.advance(p[0], p[1])?.into_iter().enumerate() {
                hits[s].push(grid.locate(&[x, y])? as u32);
            }
        }
        Ok(hits.into_iter().map(tally).collect())
    });
    let mut per_snapshot: Vec<Vec<Vec<(u32, u32)>>> = vec![Vec::with_capacity(grid.len()); k];
    for col in columns {
        for (s, c) in col?.into_iter().enumerate() {
            per_snapshot[s].push(c);
        }
    }
    per_snapshot
        .into_iter()
        .zip(snapshots)
        .map(|(cols, &d)| {
            TransferMatrix::from_columns(
                grid.len(),
                qc,
                TimeSpan::Continuous { start, duration: d },
                cols,
            )
        })
        .collect()
}

/// Ulam matrix of the driven flow over `[start, start + duration]`.
pub fn ulam_flow(
    grid: &Grid,
    system: &FlowSystem,
    start: f64,
    duration: f64,
    q: usize,
) -> Result<TransferMatrix> {
    if !(duration > 0.0) {
        return Err(Error::Precondition(format!("flow duration {duration} must be positive")));
    }
    Ok(ulam_flow_snapshots(grid, system, start, &[duration], q)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::maps::rotate;
    use crate::systems::WaveParams;
    use crate::transfer::matrix::tests::markov_single;

    #[test]
    fn rotation_is_a_shift() {
        let g = Grid::circle(8);
        let r = |x: f64| rotate(x, 0.25);
        for q in [1, 7, 20] {
            let p = ulam_map(&g, &r, q, TimeSpan::Discrete { start: 0, steps: 1 }).unwrap();
            for j in 0..8 {
                assert_eq!(p.count((j + 2) % 8, j), q as u32);
            }
            assert_eq!(p.nnz(), 8);
        }
    }

    #[test]
    fn identity_map_gives_identity() {
        let g = Grid::circle(13);
        let p = ulam_map(&g, &|x: f64| x, 5, TimeSpan::Discrete { start: 0, steps: 1 }).unwrap();
        assert_eq!(p.to_dense(), nalgebra::DMatrix::identity(13, 13));
    }

    #[test]
    fn markov_map_is_exact() {
        let g = Grid::circle(6);
        for q in [3, 30, 99] {
            let p = ulam_family(&g, &MapFamily::single(), 1, q, 0).unwrap();
            assert_eq!(p.to_dense(), markov_single().to_dense(), "q = {q}");
        }
    }

    #[test]
    fn flows_need_a_cylinder() {
        let sys = FlowSystem::default();
        assert!(ulam_flow(&Grid::circle(4), &sys, 0.0, 1.0, 4).is_err());
        assert!(ulam_flow(&Grid::cylinder(4, 2), &sys, 0.0, 1.0, 3).is_err());
        assert!(ulam_flow(&Grid::cylinder(4, 2), &sys, 0.0, 0.0, 4).is_err());
    }

    #[test]
    fn short_flows_are_nearly_identity() {
        let g = Grid::cylinder(8, 4);
        let p = ulam_flow(&g, &FlowSystem::default(), 0.0, 1e-6, 4).unwrap();
        assert_eq!(p.to_dense(), nalgebra::DMatrix::identity(32, 32));
    }

    #[test]
    fn flow_matrices_conserve_mass() {
        let g = Grid::cylinder(12, 6);
        let sys = FlowSystem {
            wave: WaveParams::travelling(),
            ..FlowSystem::default()
        };
        let ps = ulam_flow_snapshots(&g, &sys, 0.0, &[0.5, 2.0], 9).unwrap();
        for p in &ps {
            assert!(p.columns_are_stochastic());
            let total: f64 = p.apply(&vec![1.0; g.len()]).unwrap().iter().sum();
            assert!((total - g.len() as f64).abs() < 1e-9);
        }
        assert_eq!(ps[1].span(), TimeSpan::Continuous { start: 0.0, duration: 2.0 });
        let direct = ulam_flow(&g, &sys, 0.0, 2.0, 9).unwrap();
        assert_eq!(direct, ps[1]);
    }

    #[test]
    fn family_cache_labels_steps() {
        let g = Grid::circle(6);
        let cache = FamilyMatrices::new(&g, &MapFamily::periodic3(), 6).unwrap();
        let sym = SymbolSequence::periodic(&[1, 2, 3], -6, 6).unwrap();
        let c = cache.cocycle(&sym, -2, 4).unwrap();
        assert_eq!(c.span(), TimeSpan::Discrete { start: -2, steps: 4 });
        assert_eq!(c.factors()[2], cache.for_symbol(1).unwrap().with_span(TimeSpan::Discrete { start: 0, steps: 1 }));
        let id = cache.cocycle(&sym, 3, 0).unwrap();
        assert_eq!(id.span(), TimeSpan::Discrete { start: 3, steps: 0 });
        assert!(cache.for_symbol(4).is_err());
        assert!(cache.cocycle(&sym, 5, 3).is_err());
    }
}
