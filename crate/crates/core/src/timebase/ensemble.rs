use std::io::{self, Write};

use rayon::prelude::*;

use super::grid::{fmt_f64, Curve, TimeGrid};
use super::stream::{RandomStream, StreamKey};
use crate::error::{Error, Result};

/// Paths per work unit. Fixed so reductions combine partial sums in the same
/// order whatever the thread count.
const CHUNK: usize = 64;

/// Anything that can hand out path `i` of an ensemble on demand.
///
/// Implementations must be pure in `i`: generating path `i` twice, or on
/// different threads, yields identical values.
pub trait PathSource: Sync {
    fn grid(&self) -> &TimeGrid;
    fn n_paths(&self) -> usize;
    fn with_path<R>(&self, i: usize, f: impl FnOnce(&[f64]) -> R) -> R;
}

/// Fully materialized ensemble, row-major `n_paths x (n_steps + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    n_paths: usize,
    values: Vec<f64>,
    master_seed: u64,
}

impl PathEnsemble {
    /// Fills every row in parallel; row `i` is produced from stream `i` of
    /// `key`.
    pub fn generate<F>(grid: TimeGrid, n_paths: usize, key: StreamKey, path: F) -> Result<Self>
    where
        F: Fn(RandomStream) -> Curve + Sync,
    {
        if n_paths == 0 {
            return Err(Error::param("n_paths", "must be positive"));
        }
        let rows: Vec<Curve> = (0..n_paths)
            .into_par_iter()
            .map(|i| path(key.stream(i as u64)))
            .collect();
        let mut values = Vec::with_capacity(n_paths * grid.len());
        for row in rows {
            if row.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(row.values());
        }
        Ok(PathEnsemble {
            grid,
            n_paths,
            values,
            master_seed: key.seed(),
        })
    }

    /// Collects an arbitrary source into memory.
    pub fn collect<S: PathSource>(source: &S, master_seed: u64) -> Self {
        let grid = *source.grid();
        let rows = map_paths(source, |_, p| p.to_vec());
        PathEnsemble {
            grid,
            n_paths: rows.len(),
            values: rows.concat(),
            master_seed,
        }
    }

    pub fn from_rows(grid: TimeGrid, rows: Vec<Curve>, master_seed: u64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("n_paths", "must be positive"));
        }
        let mut values = Vec::with_capacity(rows.len() * grid.len());
        for r in &rows {
            if r.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(r.values());
        }
        Ok(PathEnsemble {
            grid,
            n_paths: rows.len(),
            values,
            master_seed,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.grid.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Samples across paths at node `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.row(i)[k]).collect()
    }

    /// `t,path_0,...,path_{n-1}`; meant for small ensembles.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 0..self.n_paths {
            write!(out, ",path_{i}")?;
        }
        writeln!(out)?;
        for k in 0..self.grid.len() {
            write!(out, "{}", fmt_f64(self.grid.t(k)))?;
            for i in 0..self.n_paths {
                write!(out, ",{}", fmt_f64(self.row(i)[k]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl PathSource for PathEnsemble {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn n_paths(&self) -> usize {
        self.n_paths
    }

    fn with_path<R>(&self, i: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        f(self.row(i))
    }
}

/// Applies `f` to every path in parallel, returning results in path order.
pub fn map_paths<S, T, F>(source: &S, f: F) -> Vec<T>
where
    S: PathSource,
    T: Send,
    F: Fn(usize, &[f64]) -> T + Sync,
{
    (0..source.n_paths())
        .into_par_iter()
        .map(|i| source.with_path(i, |p| f(i, p)))
        .collect()
}

/// Accumulates a `width`-long vector over all paths. `f` adds the
/// contribution of one path into the accumulator. Chunk partial sums are
/// combined in chunk order, so the result is bit-identical for any thread
/// count.
pub fn fold_paths<S, F>(source: &S, width: usize, f: F) -> Vec<f64>
where
    S: PathSource,
    F: Fn(usize, &[f64], &mut [f64]) + Sync,
{
    let n = source.n_paths();
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                source.with_path(i, |p| f(i, p, &mut acc));
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Sum with a fixed binary reduction tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean of i.i.d. values.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
