use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::fmt_f64;

/// Uniform discretization `t_k = k T / M`, `k = 0..=M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

pub fn make_grid(horizon: f64, steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, steps)
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return invalid(format!("horizon must be positive and finite, got {horizon}"));
        }
        if steps == 0 {
            return invalid("a grid needs at least one step");
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `M + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            self.horizon * k as f64 / self.steps as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Index of the grid point at time `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.steps_in(t).ok_or(Error::OffGrid {
            t,
            dt: self.dt(),
            horizon: self.horizon,
        })
    }

    fn steps_in(&self, t: f64) -> Option<usize> {
        if !t.is_finite() || t < 0.0 {
            return None;
        }
        let k = (t / self.dt()).round();
        let slack = 1e-9 * self.dt();
        if k > self.steps as f64 || (self.time(k as usize) - t).abs() > slack {
            return None;
        }
        Some(k as usize)
    }

    /// Grid with `factor` times as many steps on the same horizon.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return invalid("refinement factor must be at least 1");
        }
        Self::new(self.horizon, self.steps * factor)
    }
}

/// Real-valued trajectory sampled on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "path has {} values but the grid has {} points",
                values.len(),
                grid.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("path value at index {k} is not finite"));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for solver outputs whose length is known to match.
    pub(crate) fn from_parts(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `||f||_t`: the largest `|f(t_k)|` over grid points `t_k <= t`.
    pub fn sup_norm(&self, t: f64) -> Result<f64> {
        let k = self.grid.index_of(t)?;
        Ok(self.values[..=k].iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// `w_t(f, delta)`: the largest `|f(t_j) - f(t_k)|` over grid pairs within
    /// `delta` of each other, both at or before `t`.
    pub fn modulus(&self, t: f64, delta: f64) -> Result<f64> {
        let k = self.grid.index_of(t)?;
        if !(delta > 0.0) {
            return invalid(format!("modulus window must be positive, got {delta}"));
        }
        if delta > t + 1e-9 * self.grid.dt() {
            return invalid(format!("modulus window {delta} exceeds the horizon {t}"));
        }
        let width = self.grid.index_of(delta)?;
        Ok(modulus_of(&self.values[..=k], width))
    }

    /// Every `factor`-th point, as a path on the coarser grid.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.grid.steps % factor != 0 {
            return invalid(format!(
                "cannot coarsen {} steps by a factor of {factor}",
                self.grid.steps
            ));
        }
        let grid = TimeGrid::new(self.grid.horizon, self.grid.steps / factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self::from_parts(grid, values))
    }

    /// CSV with header `t,<column>` and one row per grid point.
    pub fn write_csv<W: Write>(&self, out: &mut W, column: &str) -> Result<()> {
        writeln!(out, "t,{column}")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.grid.time(k)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Sliding-window oscillation: max over `j` of `|f_j - f_i|` with `j - width <= i <= j`.
pub(crate) fn modulus_of(values: &[f64], width: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (j, &v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&i| values[i] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&i| values[i] >= v) {
            minq.pop_back();
        }
        minq.push_back(j);
        while maxq.front().is_some_and(|&i| i + width < j) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&i| i + width < j) {
            minq.pop_front();
        }
        let hi = values[*maxq.front().unwrap()];
        let lo = values[*minq.front().unwrap()];
        best = best.max(hi - lo);
    }
    best
}

/// Arithmetic mean `<v>`. An empty slice yields NaN.
pub fn mean_all(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `<v>_i`: mean over all entries except index `i`.
pub fn mean_exclude(v: &[f64], i: usize) -> Result<f64> {
    if v.len() < 2 {
        return invalid("mean excluding one entry needs at least two entries");
    }
    if i >= v.len() {
        return invalid(format!("index {i} out of range for length {}", v.len()));
    }
    let sum: f64 = v
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| x)
        .sum();
    Ok(sum / (v.len() - 1) as f64)
}
