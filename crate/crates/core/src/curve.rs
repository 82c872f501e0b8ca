//! A time grid paired with function values.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fm;

/// Values of a survival, density or hazard function sampled on a strictly
/// increasing grid of nonnegative times.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid("grid and values differ in length"));
        }
        validate_grid(&grid)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("curve values must be finite"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on `grid`.
    pub fn sample<F: FnMut(f64) -> f64>(grid: &[f64], f: F) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().copied().map(f).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().copied().zip(self.values.iter().copied())
    }

    /// Linear interpolation, clamped to the end values outside the grid.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if n == 0 {
            return f64::NAN;
        }
        if t <= self.grid[0] {
            return self.values[0];
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let i = self.grid.partition_point(|&g| g <= t) - 1;
        let w = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Largest absolute difference at shared grid points.
    pub fn sup_distance(&self, other: &Curve) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("curves are sampled on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidGrid(
            "grid times must be finite and nonnegative",
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing"));
    }
    Ok(())
}

/// `n` points evenly spaced on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) || lo < 0.0 {
        return Err(Error::InvalidGrid("need n >= 2 and 0 <= lo < hi"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    grid[n - 1] = hi;
    Ok(grid)
}

/// `n` points evenly spaced in `ln t` on `[lo, hi]`, `lo > 0`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) || lo <= 0.0 {
        return Err(Error::InvalidGrid("need n >= 2 and 0 < lo < hi"));
    }
    let (a, b) = (fm::ln(lo), fm::ln(hi));
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| fm::exp(a + step * i as f64)).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}
