use crate::error::{Error, Result};

/// Relative tolerance used to accept externally supplied sample times as a
/// uniform grid.
pub const UNIFORM_TOL: f64 = 1e-12;

/// Uniform time grid `start, start + step, ..., start + (len - 1) * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl TimeGrid {
    /// Grid covering `[start, end]` with the given step. The last sample is
    /// the largest grid point not exceeding `end` (up to rounding).
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if !(start.is_finite() && end.is_finite()) || end < start {
            return Err(Error::param("end", format!("grid end {end} precedes start {start}")));
        }
        let intervals = ((end - start) / step + 1e-9).floor() as usize;
        Ok(TimeGrid {
            start,
            step,
            len: intervals + 1,
        })
    }

    pub fn from_len(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if len == 0 {
            return Err(Error::param("len", "grid must hold at least one sample"));
        }
        Ok(TimeGrid { start, step, len })
    }

    /// Accepts explicit sample times if they are uniformly spaced.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        match times {
            [] => Err(Error::NonUniformGrid("no samples".into())),
            [t] => TimeGrid::from_len(*t, 1.0, 1),
            [t0, t1, ..] => {
                let step = t1 - t0;
                if !(step > 0.0) {
                    return Err(Error::NonUniformGrid("non-increasing times at index 1".into()));
                }
                let scale = times.last().unwrap().abs().max(t0.abs()).max(step);
                for (k, t) in times.iter().enumerate() {
                    let expected = t0 + k as f64 * step;
                    if (t - expected).abs() > UNIFORM_TOL * scale {
                        return Err(Error::NonUniformGrid(format!(
                            "sample {k} at {t} deviates from {expected}"
                        )));
                    }
                }
                TimeGrid::from_len(*t0, step, times.len())
            }
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.time(k)).collect()
    }

    /// Index of the first sample at or after `t`, if any.
    pub fn index_at_or_after(&self, t: f64) -> Option<usize> {
        let k = ((t - self.start) / self.step - 1e-9).ceil().max(0.0) as usize;
        (k < self.len).then_some(k)
    }

    /// Number of steps spanning a duration, rounded to the nearest sample.
    pub fn steps_in(&self, duration: f64) -> usize {
        (duration / self.step).round() as usize
    }
}
