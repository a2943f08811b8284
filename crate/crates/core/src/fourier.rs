//! Uniform grids, grid functions and discrete Fourier multipliers.
//!
//! Transforms follow the convention `ĝ(ξ) = ∫ e^{izξ} g(z) dz`. On a uniform
//! grid the origin phase `e^{i z₀ ξ}` cancels between the forward and the
//! inverse transform, so a diagonal multiplier can be applied with plain
//! unnormalised FFTs: rustfft's `Inverse` direction carries the `e^{+i}`
//! kernel of the forward transform here and vice versa.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `len` equally spaced points `start + k·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::Grid(format!("grid step must be positive, got {step}")));
        }
        if len < 2 {
            return Err(Error::Grid("grid needs at least two points".into()));
        }
        Ok(Self { start, step, len })
    }

    /// Grid of `len` points covering `[lo, hi)` (periodic layout).
    pub fn covering(lo: f64, hi: f64, len: usize) -> Result<Self> {
        Self::new(lo, (hi - lo) / len as f64, len)
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.point(k))
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    /// Dual frequency for FFT bin `k`: `2πk/(NΔ)` with the upper half folded
    /// to negative frequencies.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.len as i64;
        let k = k as i64;
        let signed = if k <= n / 2 { k } else { k - n };
        2.0 * std::f64::consts::PI * signed as f64 / (self.len as f64 * self.step)
    }
}

/// Real values sampled on a 1-D uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1 {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl GridFunction1 {
    pub fn from_fn<F: Fn(f64) -> f64>(grid: UniformGrid, f: F) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Real values on a tensor `(t, x)` grid, stored t-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2 {
    pub t_grid: UniformGrid,
    pub x_grid: UniformGrid,
    pub values: Vec<f64>,
}

impl GridFunction2 {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(t_grid: UniformGrid, x_grid: UniformGrid, f: F) -> Self {
        let mut values = Vec::with_capacity(t_grid.len * x_grid.len);
        for t in t_grid.points() {
            for x in x_grid.points() {
                values.push(f(t, x));
            }
        }
        Self {
            t_grid,
            x_grid,
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.x_grid.len + j]
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, t: f64, x: f64) -> Option<f64> {
        let (i, wt) = locate(&self.t_grid, t)?;
        let (j, wx) = locate(&self.x_grid, x)?;
        let v00 = self.at(i, j);
        let v01 = self.at(i, j + 1);
        let v10 = self.at(i + 1, j);
        let v11 = self.at(i + 1, j + 1);
        Some((1.0 - wt) * ((1.0 - wx) * v00 + wx * v01) + wt * ((1.0 - wx) * v10 + wx * v11))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn locate(grid: &UniformGrid, s: f64) -> Option<(usize, f64)> {
    let pos = (s - grid.start) / grid.step;
    if !(pos >= 0.0) || pos > (grid.len - 1) as f64 {
        return None;
    }
    let i = (pos.floor() as usize).min(grid.len - 2);
    Some((i, pos - i as f64))
}

/// Applies a Fourier multiplier to a 1-D grid function; `m(k)` is the
/// multiplier at bin `k`, whose frequency is `grid.frequency(k)`.
pub fn apply_multiplier_1d<M: Fn(usize) -> Complex64>(g: &GridFunction1, m: M) -> GridFunction1 {
    let n = g.grid.len;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft(n, FftDirection::Inverse);
    let inv = planner.plan_fft(n, FftDirection::Forward);
    let mut buf: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        *c *= m(k);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    GridFunction1 {
        grid: g.grid,
        values: buf.iter().map(|c| c.re * scale).collect(),
    }
}

/// Applies a Fourier multiplier to a 2-D grid function; `m(i, j)` is the
/// multiplier at time bin `i` and space bin `j`.
pub fn apply_multiplier_2d<M: Fn(usize, usize) -> Complex64>(g: &GridFunction2, m: M) -> GridFunction2 {
    let nt = g.t_grid.len;
    let nx = g.x_grid.len;
    let mut buf: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, nt, nx, FftDirection::Inverse);
    for i in 0..nt {
        for j in 0..nx {
            buf[i * nx + j] *= m(i, j);
        }
    }
    fft2(&mut buf, nt, nx, FftDirection::Forward);
    let scale = 1.0 / (nt * nx) as f64;
    GridFunction2 {
        t_grid: g.t_grid,
        x_grid: g.x_grid,
        values: buf.iter().map(|c| c.re * scale).collect(),
    }
}

fn fft2(buf: &mut [Complex64], rows: usize, cols: usize, dir: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft(cols, dir);
    for row in buf.chunks_exact_mut(cols) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft(rows, dir);
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for i in 0..rows {
            column[i] = buf[i * cols + j];
        }
        col_fft.process(&mut column);
        for i in 0..rows {
            buf[i * cols + j] = column[i];
        }
    }
}
