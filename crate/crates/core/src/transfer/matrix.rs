//! Column-stochastic sparse matrices with exact transition counts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BoxSet;
use crate::parallel::map_range;
use crate::transfer::operator::LinearOperator;

/// Time interval a matrix transports densities over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeSpan {
    /// `steps` applications of the shift starting at symbol index `start`.
    Discrete { start: i64, steps: usize },
    /// Flow time `[start, start + duration]`.
    Continuous { start: f64, duration: f64 },
}

impl TimeSpan {
    pub fn is_empty(&self) -> bool {
        match *self {
            TimeSpan::Discrete { steps, .. } => steps == 0,
            TimeSpan::Continuous { duration, .. } => duration == 0.0,
        }
    }

    /// Whether `next` starts where `self` ends.
    pub fn chains_to(&self, next: &TimeSpan) -> bool {
        match (*self, *next) {
            (TimeSpan::Discrete { start, steps }, TimeSpan::Discrete { start: s2, .. }) => {
                start + steps as i64 == s2
            }
            (
                TimeSpan::Continuous { start, duration },
                TimeSpan::Continuous { start: s2, .. },
            ) => (start + duration - s2).abs() <= 1e-9 * (1.0 + s2.abs()),
            _ => false,
        }
    }

    /// The span covering `self` followed by `next`.
    pub fn extend(&self, next: &TimeSpan) -> Result<TimeSpan> {
        if !self.chains_to(next) {
            return Err(Error::Chain(format!("{self} is not followed by {next}")));
        }
        Ok(match (*self, *next) {
            (TimeSpan::Discrete { start, steps }, TimeSpan::Discrete { steps: s2, .. }) => {
                TimeSpan::Discrete {
                    start,
                    steps: steps + s2,
                }
            }
            (
                TimeSpan::Continuous { start, duration },
                TimeSpan::Continuous { duration: d2, .. },
            ) => TimeSpan::Continuous {
                start,
                duration: duration + d2,
            },
            _ => unreachable!(),
        })
    }

    /// Zero-length span at the end of `self`.
    pub fn end_point(&self) -> TimeSpan {
        match *self {
            TimeSpan::Discrete { start, steps } => TimeSpan::Discrete {
                start: start + steps as i64,
                steps: 0,
            },
            TimeSpan::Continuous { start, duration } => TimeSpan::Continuous {
                start: start + duration,
                duration: 0.0,
            },
        }
    }
}

impl std::fmt::Display for TimeSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeSpan::Discrete { start, steps } => write!(f, "discrete:{start}:{steps}"),
            TimeSpan::Continuous { start, duration } => write!(f, "continuous:{start}:{duration}"),
        }
    }
}

impl std::str::FromStr for TimeSpan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            source_name: "time span".into(),
            message: format!("cannot read {s:?}"),
        };
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let a = parts.next().ok_or_else(bad)?;
        let b = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match kind {
            "discrete" => Ok(TimeSpan::Discrete {
                start: a.parse().map_err(|_| bad())?,
                steps: b.parse().map_err(|_| bad())?,
            }),
            "continuous" => Ok(TimeSpan::Continuous {
                start: a.parse().map_err(|_| bad())?,
                duration: b.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Sparse `n × n` matrix with entries `count / q`, stored both by column
/// and by row. Entry `(i, j)` is the fraction of box `j`'s test points
/// that land in box `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    n: usize,
    q: u32,
    span: TimeSpan,
    col_ptr: Vec<usize>,
    col_rows: Vec<u32>,
    col_counts: Vec<u32>,
    row_ptr: Vec<usize>,
    row_cols: Vec<u32>,
    row_counts: Vec<u32>,
}

impl TransferMatrix {
    /// Build from per-column `(row, count)` lists. Each column's counts
    /// must add up to `q`.
    pub fn from_columns(
        n: usize,
        q: u32,
        span: TimeSpan,
        columns: Vec<Vec<(u32, u32)>>,
    ) -> Result<Self> {
        if columns.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: columns.len(),
            });
        }
        if q == 0 {
            return Err(Error::Config("test point count must be positive".into()));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut col_rows = Vec::new();
        let mut col_counts = Vec::new();
        let mut row_len = vec![0usize; n];
        col_ptr.push(0);
        for (j, mut col) in columns.into_iter().enumerate() {
            col.sort_unstable_by_key(|e| e.0);
            let mut total = 0u64;
            let start = col_rows.len();
            for (i, c) in col {
                if i as usize >= n {
                    return Err(Error::Precondition(format!("row {i} out of range in column {j}")));
                }
                if c == 0 {
                    continue;
                }
                total += c as u64;
                if col_rows.len() > start && *col_rows.last().unwrap() == i {
                    *col_counts.last_mut().unwrap() += c;
                } else {
                    col_rows.push(i);
                    col_counts.push(c);
                    row_len[i as usize] += 1;
                }
            }
            if total != q as u64 {
                return Err(Error::Precondition(format!(
                    "column {j} holds {total} of {q} test points"
                )));
            }
            col_ptr.push(col_rows.len());
        }

        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + row_len[i];
        }
        let mut fill = row_ptr.clone();
        let mut row_cols = vec![0u32; col_rows.len()];
        let mut row_counts = vec![0u32; col_rows.len()];
        for j in 0..n {
            for e in col_ptr[j]..col_ptr[j + 1] {
                let i = col_rows[e] as usize;
                row_cols[fill[i]] = j as u32;
                row_counts[fill[i]] = col_counts[e];
                fill[i] += 1;
            }
        }
        Ok(Self {
            n,
            q,
            span,
            col_ptr,
            col_rows,
            col_counts,
            row_ptr,
            row_cols,
            row_counts,
        })
    }

    /// Build from a row-major table of counts.
    pub fn from_count_rows(q: u32, span: TimeSpan, rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        let mut columns = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    columns[j].push((i as u32, c));
                }
            }
        }
        Self::from_columns(n, q, span, columns)
    }

    pub fn identity(n: usize, span: TimeSpan) -> Self {
        Self::from_columns(n, 1, span, (0..n).map(|j| vec![(j as u32, 1)]).collect())
            .expect("identity is stochastic")
    }

    /// The same entries over a different time span.
    pub fn with_span(&self, span: TimeSpan) -> Self {
        Self {
            span,
            ..self.clone()
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn span(&self) -> TimeSpan {
        self.span
    }

    pub fn nnz(&self) -> usize {
        self.col_rows.len()
    }

    /// `(row, count)` pairs of column `j`, rows ascending.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.col_rows[r.clone()]
            .iter()
            .zip(&self.col_counts[r])
            .map(|(&i, &c)| (i as usize, c))
    }

    /// `(column, count)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.row_cols[r.clone()]
            .iter()
            .zip(&self.row_counts[r])
            .map(|(&j, &c)| (j as usize, c))
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.column(j).find(|e| e.0 == i).map_or(0, |e| e.1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.q as f64
    }

    /// Whether every column's counts add up to exactly `q`.
    pub fn columns_are_stochastic(&self) -> bool {
        (0..self.n).all(|j| self.column(j).map(|e| e.1 as u64).sum::<u64>() == self.q as u64)
    }

    /// Whether every row's counts add up to exactly `q`.
    pub fn rows_are_stochastic(&self) -> bool {
        (0..self.n).all(|i| self.row(i).map(|e| e.1 as u64).sum::<u64>() == self.q as u64)
    }

    /// Share of the total mass that stays in its box.
    pub fn diagonal_mass(&self) -> f64 {
        let stay: u64 = (0..self.n).map(|j| self.count(j, j) as u64).sum();
        stay as f64 / (self.q as f64 * self.n as f64)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for (i, c) in self.column(j) {
                m[(i, j)] = c as f64 / self.q as f64;
            }
        }
        m
    }

    /// Test points of `src` boxes landing in `dst` boxes.
    pub fn transition_count(&self, src: &BoxSet, dst: &BoxSet) -> u64 {
        let dst = dst.mask();
        src.indices()
            .iter()
            .flat_map(|&j| self.column(j))
            .filter(|&(i, _)| dst.get(i).copied().unwrap_or(false))
            .map(|(_, c)| c as u64)
            .sum()
    }
}

impl LinearOperator for TransferMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let q = self.q as f64;
        let rows = map_range(self.n, |i| {
            self.row(i).map(|(j, c)| c as f64 * x[j]).sum::<f64>() / q
        });
        y.copy_from_slice(&rows);
    }

    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        let q = self.q as f64;
        let cols = map_range(self.n, |j| {
            self.column(j).map(|(i, c)| c as f64 * x[i]).sum::<f64>() / q
        });
        y.copy_from_slice(&cols);
    }
}

/// Estimated fraction of `src` carried into `dst`:
/// `Σ_{j∈src} Σ_{i∈dst} P_ij / |src|`.
pub fn rho_hat(p: &TransferMatrix, src: &BoxSet, dst: &BoxSet) -> Result<f64> {
    if src.is_empty() {
        return Err(Error::EmptySet("source set"));
    }
    if src.grid_len() != p.dim() || dst.grid_len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: if src.grid_len() != p.dim() { src.grid_len() } else { dst.grid_len() },
        });
    }
    Ok(p.transition_count(src, dst) as f64 / (p.q() as f64 * src.len() as f64))
}
