//! Windowed Pearson synchronization indicator, onset detection and
//! coupling/detuning sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

pub const DEFAULT_WINDOW: f64 = 20.0;
pub const DEFAULT_THRESHOLD: f64 = 0.9;
/// Windows where either signal has variance at or below this are undefined.
pub const VARIANCE_EPS: f64 = 1e-14;
/// Minimum number of grid steps per window.
pub const MIN_WINDOW_STEPS: usize = 10;

/// Real samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Series {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("sample {k} is not finite")));
        }
        Ok(Series { grid, values })
    }

    pub fn from_times(times: &[f64], values: Vec<f64>) -> Result<Self> {
        Series::new(TimeGrid::from_times(times)?, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Samples that may be undefined (`None`), on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GappedSeries {
    pub grid: TimeGrid,
    pub values: Vec<Option<f64>>,
}

impl GappedSeries {
    /// Sample at the first grid time at or after `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.grid
            .index_at_or_after(t)
            .and_then(|k| self.values.get(k).copied().flatten())
    }

    /// Whether every sample with time in `[from, to]` is defined and has
    /// `|C| >= threshold`. False if the span holds no samples.
    pub fn sustained(&self, from: f64, to: f64, threshold: f64) -> bool {
        let mut any = false;
        for (k, v) in self.values.iter().enumerate() {
            let t = self.grid.time(k);
            if t < from - 1e-9 * self.grid.step() || t > to + 1e-9 * self.grid.step() {
                continue;
            }
            any = true;
            match v {
                Some(c) if c.abs() >= threshold => {}
                _ => return false,
            }
        }
        any
    }

    /// Smallest `|C|` over `[from, to]`; `None` if any sample there is
    /// undefined or the span is empty.
    pub fn min_abs(&self, from: f64, to: f64) -> Option<f64> {
        let mut out: Option<f64> = None;
        for (k, v) in self.values.iter().enumerate() {
            let t = self.grid.time(k);
            if t < from - 1e-9 * self.grid.step() || t > to + 1e-9 * self.grid.step() {
                continue;
            }
            let c = (*v)?.abs();
            out = Some(out.map_or(c, |m| m.min(c)));
        }
        out
    }
}

fn window_steps(grid: &TimeGrid, window: f64) -> Result<usize> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::param("window", format!("must be positive, got {window}")));
    }
    let steps = (window / grid.step()).round() as usize;
    if steps < MIN_WINDOW_STEPS {
        return Err(Error::param(
            "window",
            format!(
                "must span at least {MIN_WINDOW_STEPS} grid steps (window {window}, step {})",
                grid.step()
            ),
        ));
    }
    Ok(steps)
}

fn check_shared_grid(a: &Series, b: &Series) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (ga, gb) = (a.grid(), b.grid());
    let tol = 1e-12 * ga.step().abs().max(ga.start().abs()).max(1.0);
    if (ga.start() - gb.start()).abs() > tol || (ga.step() - gb.step()).abs() > 1e-12 * ga.step() {
        return Err(Error::NonUniformGrid("series are sampled on different grids".into()));
    }
    Ok(())
}

/// Pearson coefficient of two equal-length slices (rectangle-rule sums);
/// `None` when either variance is at most [`VARIANCE_EPS`].
pub fn pearson_slice(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa / n <= VARIANCE_EPS || sbb / n <= VARIANCE_EPS {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// `C(t | window)` over the forward window `[t, t + window]`, for every grid
/// time whose window fits inside the series.
pub fn pearson(a: &Series, b: &Series, window: f64) -> Result<GappedSeries> {
    check_shared_grid(a, b)?;
    let w = window_steps(a.grid(), window)?;
    let count = a.len().saturating_sub(w);
    let values = (0..count)
        .map(|k| pearson_slice(&a.values[k..=k + w], &b.values[k..=k + w]))
        .collect();
    Ok(GappedSeries {
        grid: TimeGrid::from_len(a.grid().start(), a.grid().step(), count)?,
        values,
    })
}

/// `C(t | window)` at the first grid time at or after `t`. `Ok(None)` if the
/// window is undefined or does not fit.
pub fn pearson_at(a: &Series, b: &Series, t: f64, window: f64) -> Result<Option<f64>> {
    check_shared_grid(a, b)?;
    let w = window_steps(a.grid(), window)?;
    let Some(k) = a.grid().index_at_or_after(t) else {
        return Ok(None);
    };
    if k + w >= a.len() {
        return Ok(None);
    }
    Ok(pearson_slice(&a.values[k..=k + w], &b.values[k..=k + w]))
}

/// Earliest time where `|C| >= threshold` holds for every sample over one
/// full window.
pub fn sync_onset(pearson: &GappedSeries, window: f64, threshold: f64) -> Option<f64> {
    let w = (window / pearson.grid.step()).round() as usize;
    let ok: Vec<bool> = pearson
        .values
        .iter()
        .map(|v| v.is_some_and(|c| c.abs() >= threshold))
        .collect();
    let mut run = 0usize;
    for (k, &good) in ok.iter().enumerate() {
        run = if good { run + 1 } else { 0 };
        if run > w {
            return Some(pearson.grid.time(k - w));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub pearson: GappedSeries,
    pub onset: Option<f64>,
    pub window: f64,
    pub threshold: f64,
}

pub fn analyze(a: &Series, b: &Series, window: f64, threshold: f64) -> Result<SyncReport> {
    let pearson = pearson(a, b, window)?;
    let onset = sync_onset(&pearson, window, threshold);
    Ok(SyncReport {
        pearson,
        onset,
        window,
        threshold,
    })
}

/// `|C|` over a grid of couplings (rows) and frequencies (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMatrix {
    pub lambdas: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Row-major, `values[i * omegas.len() + j]`; `None` when the cell
    /// failed or its window was undefined.
    pub values: Vec<Option<f64>>,
}

impl SweepMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.omegas.len() + j]
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        let n = self.omegas.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Number of cells in row `i` with `|C| > threshold`.
    pub fn sync_width(&self, i: usize, threshold: f64) -> usize {
        self.row(i).iter().filter(|v| v.is_some_and(|c| c > threshold)).count()
    }

    /// Whether the cells of row `i` above the threshold form one contiguous
    /// run of frequencies (an empty row counts as an interval).
    pub fn is_interval(&self, i: usize, threshold: f64) -> bool {
        let above: Vec<usize> = (0..self.omegas.len())
            .filter(|&j| self.get(i, j).is_some_and(|c| c > threshold))
            .collect();
        above.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Fraction of cells with `|omega - 1| >= exclusion` whose `|C|` exceeds
    /// the threshold.
    pub fn fraction_above_off_resonance(&self, threshold: f64, exclusion: f64) -> f64 {
        let mut total = 0usize;
        let mut above = 0usize;
        for i in 0..self.lambdas.len() {
            for (j, w) in self.omegas.iter().enumerate() {
                if (w - 1.0).abs() < exclusion {
                    continue;
                }
                total += 1;
                if self.get(i, j).is_some_and(|c| c > threshold) {
                    above += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            above as f64 / total as f64
        }
    }
}

/// Evaluates `|C|` at `eval_time` for every `(lambda, omega)` pair. Cells are
/// independent and run on the current rayon pool; failed cells are `None`.
pub fn arnold_sweep<F>(lambdas: &[f64], omegas: &[f64], runner: F, eval_time: f64, window: f64) -> SweepMatrix
where
    F: Fn(f64, f64) -> Result<(Series, Series)> + Sync,
{
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| omegas.iter().map(move |&w| (l, w)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(l, w)| match runner(l, w) {
            Ok((a, b)) => match pearson_at(&a, &b, eval_time, window) {
                Ok(c) => c.map(f64::abs),
                Err(e) => {
                    log::warn!("sweep cell (lambda {l}, omega {w}): {e}");
                    None
                }
            },
            Err(e) => {
                log::warn!("sweep cell (lambda {l}, omega {w}): {e}");
                None
            }
        })
        .collect();
    SweepMatrix {
        lambdas: lambdas.to_vec(),
        omegas: omegas.to_vec(),
        values,
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}
