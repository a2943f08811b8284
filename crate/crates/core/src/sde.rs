//! Explicit Euler scheme for `dX = dS + a(t, X) dt` driven by sampled Lévy
//! increments, and first-exit times.
//!
//! The state is kept as `X_k = (x₀ + S_k) + Y_k` where `Y` accumulates the
//! drift terms `a(t_j, X_j)·Δt_j`. This is the same recursion as
//! `X_{k+1} = X_k + ΔS_k + a(t_k, X_k)Δt_k`, but with zero drift it returns
//! `x₀ + S` bit for bit, and `Y` is the drift integral the convergence
//! diagnostics need.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::sampler::{cumulative, validate_time_grid, LevySampler, PathKind, RngStream, SamplePath, SamplerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub x0: f64,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_paths() -> usize {
    1000
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt <= self.t_end) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= t_end, got dt={} t_end={}",
                self.dt, self.t_end
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidParameter("x0 must be finite".into()));
        }
        Ok(())
    }

    /// `0, dt, 2dt, …` with the last point moved to `t_end`.
    pub fn time_grid(&self) -> Vec<f64> {
        uniform_time_grid(self.t_end, self.dt)
    }

    /// Stream of path `j`.
    pub fn stream(&self, j: usize) -> RngStream {
        RngStream::new(self.seed, 0).offset(j as u64)
    }
}

pub(crate) fn uniform_time_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    grid.push(t_end);
    grid
}

/// A solution path together with its driving noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerPath {
    pub path: SamplePath,
    /// `ΔS_k` over each grid interval.
    pub increments: Vec<f64>,
    /// `Y_k = Σ_{j<k} a(t_j, X_j)Δt_j`.
    pub drift_integral: Vec<f64>,
}

impl EulerPath {
    pub fn levy_path(&self) -> SamplePath {
        SamplePath {
            t_grid: self.path.t_grid.clone(),
            values: cumulative(&self.increments),
            kind: PathKind::Levy,
        }
    }

    pub fn terminal(&self) -> f64 {
        *self.path.values.last().expect("nonempty path")
    }
}

/// Euler solution on `t_grid` for given increments; the coupling entry
/// point, since any drift can reuse the same noise.
pub fn euler_from_increments(a: &DriftSpec, x0: f64, t_grid: &[f64], increments: &[f64]) -> Result<EulerPath> {
    validate_time_grid(t_grid)?;
    if increments.len() + 1 != t_grid.len() {
        return Err(Error::InvalidParameter(format!(
            "{} increments for a grid of {} points",
            increments.len(),
            t_grid.len()
        )));
    }
    let (values, drift_integral) = euler_states(a, 0.0, x0, t_grid, increments);
    Ok(EulerPath {
        path: SamplePath {
            t_grid: t_grid.to_vec(),
            values,
            kind: PathKind::Solution,
        },
        increments: increments.to_vec(),
        drift_integral,
    })
}

/// States and drift integrals of the Euler scheme for a path started at
/// `(t0, x0)`; `t_grid` is elapsed time, so the drift is read at `t0 + u`.
pub(crate) fn euler_states(a: &DriftSpec, t0: f64, x0: f64, t_grid: &[f64], increments: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = t_grid.len();
    let mut values = Vec::with_capacity(n);
    let mut drift_integral = Vec::with_capacity(n);
    let mut s = 0.0;
    let mut y = 0.0;
    values.push(x0 + s + y);
    drift_integral.push(y);
    for k in 0..n - 1 {
        let x = values[k];
        y += a.eval(t0 + t_grid[k], x) * (t_grid[k + 1] - t_grid[k]);
        s += increments[k];
        values.push((x0 + s) + y);
        drift_integral.push(y);
    }
    (values, drift_integral)
}

/// One Euler path on the grid of `cfg` driven by `stream`.
pub fn euler_solve(model: &LevyModel, a: &DriftSpec, cfg: &SolveConfig, stream: RngStream) -> Result<EulerPath> {
    cfg.validate()?;
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let grid = cfg.time_grid();
    let inc = sampler.increments(&grid, &mut stream.rng());
    euler_from_increments(a, cfg.x0, &grid, &inc)
}

/// `cfg.n_paths` independent paths, path `j` driven by `cfg.stream(j)`.
pub fn euler_batch(model: &LevyModel, a: &DriftSpec, cfg: &SolveConfig) -> Result<Vec<EulerPath>> {
    cfg.validate()?;
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let grid = cfg.time_grid();
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|j| {
            let inc = sampler.increments(&grid, &mut cfg.stream(j).rng());
            euler_from_increments(a, cfg.x0, &grid, &inc)
        })
        .collect()
}

/// First grid time with `|X| ≥ m`, or `+∞`.
pub fn tau_m(path: &SamplePath, m: f64) -> f64 {
    path.values
        .iter()
        .position(|v| v.abs() >= m)
        .map_or(f64::INFINITY, |k| path.t_grid[k])
}

/// `path_id,t,value` rows for every path.
pub fn write_batch_csv<W: Write>(paths: &[EulerPath], mut w: W) -> std::io::Result<()> {
    writeln!(w, "path_id,t,value")?;
    for (j, p) in paths.iter().enumerate() {
        for (t, v) in p.path.t_grid.iter().zip(&p.path.values) {
            writeln!(w, "{j},{t},{v}")?;
        }
    }
    Ok(())
}

/// One row per path: terminal value, running max of `|X|` and drift integral.
pub fn write_terminal_csv<W: Write>(paths: &[EulerPath], mut w: W) -> std::io::Result<()> {
    writeln!(w, "path_id,terminal,sup_abs,drift_integral")?;
    for (j, p) in paths.iter().enumerate() {
        let sup = p.path.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let y = p.drift_integral.last().expect("nonempty path");
        writeln!(w, "{j},{},{sup},{y}", p.terminal())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyModel;

    fn cfg(x0: f64, t_end: f64, dt: f64) -> SolveConfig {
        SolveConfig {
            x0,
            t_end,
            dt,
            n_paths: 4,
            seed: 11,
        }
    }

    #[test]
    fn grid_ends_at_t_end() {
        let g = uniform_time_grid(2.0, 0.1);
        assert_eq!(g.len(), 21);
        assert_eq!(*g.last().unwrap(), 2.0);
        let g = uniform_time_grid(1.0, 0.3);
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
    }

    #[test]
    fn zero_drift_reproduces_levy_path_bit_exactly() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let c = cfg(0.7, 1.0, 1e-2);
        let p = euler_solve(&m, &DriftSpec::zero(), &c, c.stream(0)).unwrap();
        let s = crate::sampler::sample_path(&m, &c.time_grid(), c.stream(0)).unwrap();
        for (x, sv) in p.path.values.iter().zip(&s.values) {
            assert_eq!(*x, 0.7 + sv);
        }
    }

    #[test]
    fn deterministic_ode() {
        let m = LevyModel::compound_poisson(0.0, &[]).unwrap();
        let a = DriftSpec::constant(0.5).unwrap();
        let c = cfg(1.0, 2.0, 0.25);
        let p = euler_solve(&m, &a, &c, c.stream(0)).unwrap();
        assert_eq!(p.terminal(), 2.0);
    }

    #[test]
    fn tau_m_conventions() {
        let grid = uniform_time_grid(3.0, 0.1);
        let vals: Vec<f64> = grid.clone();
        let p = SamplePath::new(grid.clone(), vals, PathKind::Solution).unwrap();
        assert!((tau_m(&p, 1.5) - 1.5).abs() < 1e-12);
        assert_eq!(tau_m(&p, 10.0), f64::INFINITY);
        let shifted = SamplePath::new(grid.clone(), grid.iter().map(|t| t + 2.0).collect(), PathKind::Solution).unwrap();
        assert_eq!(tau_m(&shifted, 1.0), 0.0);
    }

    #[test]
    fn coupled_drifts_share_noise() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let c = cfg(0.0, 1.0, 1e-2);
        let p1 = euler_solve(&m, &DriftSpec::sign(1.0).unwrap(), &c, c.stream(3)).unwrap();
        let p2 = euler_solve(&m, &DriftSpec::constant(-0.3).unwrap(), &c, c.stream(3)).unwrap();
        assert_eq!(p1.increments, p2.increments);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(cfg(0.0, 1.0, 0.0).validate().is_err());
        assert!(cfg(0.0, 1.0, 2.0).validate().is_err());
        let mut c = cfg(0.0, 1.0, 0.1);
        c.n_paths = 0;
        assert!(c.validate().is_err());
    }
}
