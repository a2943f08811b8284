//! Monte Carlo checks of the occupation estimates
//! `E∫₀^∞ e^{−λu} f(t₀+u, x₀+X_u) du ≤ N‖f‖₂` and
//! `E∫₀^{t∧τ_m} f(u, X_u) du ≤ N‖f‖_{2,m,t}`, plus the Fourier resolvent
//! of the driftless process as a deterministic oracle.
//!
//! The reference constant is `N = 2√N₁(λ)`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::{l2_norm, l2_norm_local, DriftFamily, DriftSpec, SupportBox, TestFunction};
use crate::error::{Error, Result};
use crate::fourier::{apply_multiplier_2d, GridFunction2, UniformGrid};
use crate::levy::{lambda0, n1_constant, Lambda0Options, LevyModel, N1Options};
use crate::sampler::{LevySampler, RngStream, SamplerOptions};
use crate::sde::{euler_states, uniform_time_grid};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrylovReport {
    pub experiment_id: String,
    pub lhs_estimate: f64,
    pub lhs_ci_halfwidth: f64,
    pub rhs_norm: f64,
    pub reference_constant: f64,
    pub ratio: f64,
    pub truncation_bound: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub verdict: Outcome,
}

impl KrylovReport {
    fn new(
        experiment_id: String,
        samples: &[f64],
        rhs_norm: f64,
        reference_constant: f64,
        truncation_bound: f64,
        horizon: f64,
    ) -> Self {
        let lhs = stats::mean(samples);
        let ci = stats::ci95_halfwidth(samples);
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs_norm };
        let verdict = if lhs - ci <= reference_constant * rhs_norm + truncation_bound {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        Self {
            experiment_id,
            lhs_estimate: lhs,
            lhs_ci_halfwidth: ci,
            rhs_norm,
            reference_constant,
            ratio,
            truncation_bound,
            horizon,
            n_paths: samples.len(),
            verdict,
        }
    }
}

pub const REPORT_HEADER: &str = "experiment_id,lhs,ci,rhs_norm,ref_const,ratio,truncation_bound,verdict";

pub fn write_reports_csv<W: Write>(reports: &[KrylovReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.experiment_id,
            r.lhs_estimate,
            r.lhs_ci_halfwidth,
            r.rhs_norm,
            r.reference_constant,
            r.ratio,
            r.truncation_bound,
            r.verdict
        )?;
    }
    Ok(())
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrylovConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Largest admissible `sup f·e^{−λT}/λ` relative to `N‖f‖₂`.
    #[serde(default = "default_truncation_tol")]
    pub truncation_tol: f64,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_truncation_tol() -> f64 {
    0.01
}

impl KrylovConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            dt: default_dt(),
            n_paths,
            seed,
            truncation_tol: default_truncation_tol(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.n_paths < 2 {
            return Err(Error::InvalidParameter("need dt > 0 and at least two paths".into()));
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::InvalidParameter("truncation_tol must be > 0".into()));
        }
        Ok(())
    }

    fn stream(&self, j: usize) -> RngStream {
        RngStream::new(self.seed, 0).offset(j as u64)
    }
}

/// `2√N₁(λ)`; infinite when `N₁` diverges (the existence condition fails,
/// which for `K = 0` is not excluded by the `λ₀` check).
pub fn reference_constant(model: &LevyModel, lambda: f64) -> Result<f64> {
    match n1_constant(model, lambda, &N1Options::default()) {
        Ok(n1) => Ok(2.0 * n1.value.sqrt()),
        Err(Error::ConditionNotSatisfied { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Refuses `λ < λ₀(model, K)`; returns `λ₀`.
pub fn check_lambda(model: &LevyModel, k: f64, lambda: f64) -> Result<f64> {
    let l0 = lambda0(model, k, &Lambda0Options::default())?;
    if lambda < l0 {
        return Err(Error::LambdaBelowThreshold { lambda, lambda0: l0 });
    }
    Ok(l0)
}

/// One functional evaluated by [`krylov_batch`].
#[derive(Debug, Clone)]
pub struct KrylovQuery {
    pub id: String,
    pub f: TestFunction,
    pub lambda: f64,
    pub t0: f64,
    pub x0: f64,
    /// Fixed horizon; chosen from the truncation tolerance when `None`.
    pub horizon: Option<f64>,
}

impl KrylovQuery {
    pub fn new(id: impl Into<String>, f: TestFunction, lambda: f64) -> Self {
        Self {
            id: id.into(),
            f,
            lambda,
            t0: 0.0,
            x0: 0.0,
            horizon: None,
        }
    }

    pub fn at(mut self, t0: f64, x0: f64) -> Self {
        self.t0 = t0;
        self.x0 = x0;
        self
    }
}

/// Smallest horizon that either covers the time support of `f` or makes
/// the discounted tail `sup f·e^{−λT}/λ` at most `tol·N‖f‖₂`.
pub fn auto_horizon(f: &TestFunction, lambda: f64, t0: f64, reference: f64, tol: f64) -> f64 {
    let cover = f.support().t1 - t0;
    let budget = tol * reference * l2_norm(f);
    let sup = f.sup();
    let tail = if !budget.is_finite() {
        f64::INFINITY
    } else if sup <= 0.0 || sup / lambda <= budget {
        0.0
    } else {
        (sup / (lambda * budget)).ln() / lambda
    };
    cover.min(tail).max(0.0)
}

fn truncation_bound(f: &TestFunction, lambda: f64, t0: f64, horizon: f64) -> f64 {
    if horizon >= f.support().t1 - t0 {
        0.0
    } else {
        f.sup() * (-lambda * horizon).exp() / lambda
    }
}

struct Prepared {
    reference: f64,
    horizon: f64,
}

/// Runs every query on a common path set.
///
/// Queries with the same start `(t₀, x₀)` share paths; with a constant
/// drift all queries share one set of paths started at the origin, since
/// the solution is then a translate of it.
pub fn krylov_batch(model: &LevyModel, a: &DriftSpec, queries: &[KrylovQuery], cfg: &KrylovConfig) -> Result<Vec<KrylovReport>> {
    cfg.validate()?;
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    let k = a.bound();
    let mut prepared = Vec::with_capacity(queries.len());
    let mut ref_cache: Vec<(f64, f64)> = Vec::new();
    for q in queries {
        check_lambda(model, k, q.lambda)?;
        let reference = match ref_cache.iter().find(|(l, _)| *l == q.lambda) {
            Some(&(_, r)) => r,
            None => {
                let r = reference_constant(model, q.lambda)?;
                ref_cache.push((q.lambda, r));
                r
            }
        };
        let horizon = match q.horizon {
            Some(h) if h > 0.0 => h,
            Some(h) => return Err(Error::InvalidParameter(format!("horizon must be > 0, got {h}"))),
            None => auto_horizon(&q.f, q.lambda, q.t0, reference, cfg.truncation_tol),
        };
        prepared.push(Prepared { reference, horizon });
    }

    let translate = matches!(a.family(), DriftFamily::Constant(_));
    let mut groups: Vec<((f64, f64), Vec<usize>)> = Vec::new();
    for (i, q) in queries.iter().enumerate() {
        let key = if translate { (0.0, 0.0) } else { (q.t0, q.x0) };
        match groups.iter_mut().find(|(g, _)| *g == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }

    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let mut reports: Vec<Option<KrylovReport>> = vec![None; queries.len()];
    for ((gt0, gx0), members) in groups {
        let horizon = members
            .iter()
            .map(|&i| prepared[i].horizon)
            .fold(cfg.dt, f64::max);
        let grid = uniform_time_grid(horizon, cfg.dt);
        let weights = trapezoid_weights(&grid);
        let discounts: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| grid.iter().zip(&weights).map(|(u, w)| w * (-queries[i].lambda * u).exp()).collect())
            .collect();
        let per_path: Vec<Vec<f64>> = (0..cfg.n_paths)
            .into_par_iter()
            .map(|j| {
                let inc = sampler.increments(&grid, &mut cfg.stream(j).rng());
                let (xs, _) = euler_states(a, gt0, gx0, &grid, &inc);
                members
                    .iter()
                    .zip(&discounts)
                    .map(|(&i, disc)| {
                        let q = &queries[i];
                        let dx0 = q.x0 - gx0;
                        let mut acc = 0.0;
                        for ((u, x), d) in grid.iter().zip(&xs).zip(disc) {
                            let v = q.f.eval(q.t0 + u, x + dx0);
                            if v != 0.0 {
                                acc += d * v;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        for (slot, &i) in members.iter().enumerate() {
            let samples: Vec<f64> = per_path.iter().map(|row| row[slot]).collect();
            let q = &queries[i];
            let p = &prepared[i];
            reports[i] = Some(KrylovReport::new(
                q.id.clone(),
                &samples,
                l2_norm(&q.f),
                p.reference,
                truncation_bound(&q.f, q.lambda, q.t0, horizon),
                horizon,
            ));
        }
    }
    Ok(reports.into_iter().map(|r| r.expect("every query is in a group")).collect())
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (grid[k + 1] - grid[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// Discounted occupation estimate for one test function started at `(t0, x0)`.
#[allow(clippy::too_many_arguments)]
pub fn krylov_mc(
    model: &LevyModel,
    a: &DriftSpec,
    f: &TestFunction,
    lambda: f64,
    t0: f64,
    x0: f64,
    horizon: Option<f64>,
    cfg: &KrylovConfig,
) -> Result<KrylovReport> {
    let q = KrylovQuery {
        id: "krylov".into(),
        f: f.clone(),
        lambda,
        t0,
        x0,
        horizon,
    };
    Ok(krylov_batch(model, a, &[q], cfg)?.remove(0))
}

/// `E∫₀^{t∧τ_m} f(u, X_u) du` for paths from `(0, x0)`, one report per test
/// function, all on the same paths.
///
/// The integral is the left-point sum of the step path, so nothing is
/// collected at or after the exit time. `lambda` only selects the
/// reference constant `2√N₁(λ)`.
#[allow(clippy::too_many_arguments)]
pub fn krylov_local_batch(
    model: &LevyModel,
    a: &DriftSpec,
    fs: &[(String, TestFunction)],
    m: f64,
    t: f64,
    x0: f64,
    lambda: f64,
    cfg: &KrylovConfig,
) -> Result<Vec<KrylovReport>> {
    cfg.validate()?;
    if !(m > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("need m > 0 and t > 0, got m={m} t={t}")));
    }
    check_lambda(model, a.bound(), lambda)?;
    let reference = reference_constant(model, lambda)?;
    let grid = uniform_time_grid(t, cfg.dt.min(t));
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|j| {
            if x0.abs() >= m {
                return vec![0.0; fs.len()];
            }
            let inc = sampler.increments(&grid, &mut cfg.stream(j).rng());
            let (xs, _) = euler_states(a, 0.0, x0, &grid, &inc);
            let exit = xs.iter().position(|x| x.abs() >= m).unwrap_or(xs.len() - 1);
            fs.iter()
                .map(|(_, f)| {
                    let mut acc = 0.0;
                    for k in 0..exit {
                        let v = f.eval(grid[k], xs[k]);
                        if v != 0.0 {
                            acc += v * (grid[k + 1] - grid[k]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(fs
        .iter()
        .enumerate()
        .map(|(slot, (id, f))| {
            let samples: Vec<f64> = per_path.iter().map(|row| row[slot]).collect();
            KrylovReport::new(id.clone(), &samples, l2_norm_local(f, m, t), reference, 0.0, t)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn krylov_local_mc(
    model: &LevyModel,
    a: &DriftSpec,
    f: &TestFunction,
    m: f64,
    t: f64,
    x0: f64,
    lambda: f64,
    cfg: &KrylovConfig,
) -> Result<KrylovReport> {
    let fs = [("krylov_local".to_string(), f.clone())];
    Ok(krylov_local_batch(model, a, &fs, m, t, x0, lambda, cfg)?.remove(0))
}

/// Periodic `(t, x)` grid for the resolvent transform, `[min, max)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
}

impl ResolventGrid {
    /// Grid around `support` with `pad_t`/`pad_x` multiples of the support
    /// diameter on each side.
    pub fn around(support: SupportBox, pad_t: f64, pad_x: f64, nt: usize, nx: usize) -> Self {
        let d = diameter(&support);
        Self {
            t_min: support.t0 - pad_t * d,
            t_max: support.t1 + pad_t * d,
            nt,
            x_min: support.x0 - pad_x * d,
            x_max: support.x1 + pad_x * d,
            nx,
        }
    }

    fn axes(&self) -> Result<(UniformGrid, UniformGrid)> {
        Ok((
            UniformGrid::covering(self.t_min, self.t_max, self.nt)?,
            UniformGrid::covering(self.x_min, self.x_max, self.nx)?,
        ))
    }
}

fn diameter(b: &SupportBox) -> f64 {
    (b.t1 - b.t0).hypot(b.x1 - b.x0)
}

/// The driftless resolvent `v₀(t,x) = E∫₀^∞ e^{−λs} f(t+s, x+S_s) ds` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventField {
    pub grid: GridFunction2,
    pub lambda: f64,
}

impl ResolventField {
    /// Bilinear interpolation; `None` off the grid.
    pub fn value_at(&self, t: f64, x: f64) -> Option<f64> {
        self.grid.interpolate(t, x)
    }

    pub fn sup(&self) -> f64 {
        self.grid.max()
    }

    pub fn min(&self) -> f64 {
        self.grid.min()
    }

    /// `t,x,v` rows, t-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,v")?;
        let g = &self.grid;
        for (i, t) in g.t_grid.points().enumerate() {
            for (j, x) in g.x_grid.points().enumerate() {
                writeln!(w, "{t},{x},{}", g.at(i, j))?;
            }
        }
        Ok(())
    }
}

/// Solves `v̂ = f̂ / (λ + Re ψ(ξ) + i(ζ − Im ψ(ξ)))` on a periodic grid.
///
/// The grid must extend at least twice the diameter of `supp f` beyond it
/// on every side, so that wrap-around of the periodic transform stays small.
pub fn resolvent_oracle(model: &LevyModel, f: &TestFunction, lambda: f64, grid: &ResolventGrid) -> Result<ResolventField> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let b = f.support();
    let pad = 2.0 * diameter(&b);
    if grid.t_min > b.t0 - pad || grid.t_max < b.t1 + pad || grid.x_min > b.x0 - pad || grid.x_max < b.x1 + pad {
        return Err(Error::Grid(format!(
            "resolvent grid [{}, {})x[{}, {}) must pad the support [{}, {}]x[{}, {}] by at least {pad}",
            grid.t_min, grid.t_max, grid.x_min, grid.x_max, b.t0, b.t1, b.x0, b.x1
        )));
    }
    let (tg, xg) = grid.axes()?;
    let g = GridFunction2::from_fn(tg, xg, |t, x| f.eval(t, x));
    let psi: Vec<Complex64> = (0..xg.len).map(|j| model.psi(xg.frequency(j))).collect::<Result<_>>()?;
    let field = apply_multiplier_2d(&g, |i, j| {
        let zeta = tg.frequency(i);
        let p = psi[j];
        Complex64::new(1.0, 0.0) / Complex64::new(lambda + p.re, zeta - p.im)
    });
    Ok(ResolventField { grid: field, lambda })
}

/// The ten test functions of the bound sweep, all supported in `t ≥ 0`.
pub fn default_sweep_family() -> Vec<(String, TestFunction)> {
    let sb = |t0, t1, x0, x1| SupportBox::new(t0, t1, x0, x1).expect("valid box");
    let ind = |b: SupportBox, h: f64| TestFunction::indicator(b, h).expect("valid indicator");
    let mut out = Vec::new();
    for delta in [1.0, 0.5, 0.25, 0.125] {
        out.push((format!("box_delta_{delta}"), ind(sb(0.0, delta, 0.0, delta), 1.0)));
    }
    out.push(("box_unit_centered".into(), ind(sb(0.0, 1.0, -1.0, 1.0), 1.0)));
    out.push(("box_offset".into(), ind(sb(0.5, 1.5, 0.5, 1.5), 1.0)));
    out.push((
        "bump_wide".into(),
        TestFunction::gaussian_bump(sb(0.0, 2.0, -1.0, 1.0), 1.0, (1.0, 0.0), (0.25, 0.25)).expect("valid bump"),
    ));
    out.push((
        "bump_narrow".into(),
        TestFunction::gaussian_bump(sb(0.1, 0.9, 0.1, 0.9), 1.0, (0.5, 0.5), (0.1, 0.1)).expect("valid bump"),
    ));
    out.push(("box_half_scaled_10".into(), ind(sb(0.0, 0.5, 0.0, 0.5), 10.0)));
    out.push(("strip".into(), ind(sb(0.0, 2.0, -0.1, 0.1), 1.0)));
    out
}

/// Runs [`krylov_batch`] over a family started at the origin.
pub fn bound_sweep(
    model: &LevyModel,
    a: &DriftSpec,
    lambda: f64,
    family: &[(String, TestFunction)],
    cfg: &KrylovConfig,
) -> Result<Vec<KrylovReport>> {
    let queries: Vec<KrylovQuery> = family
        .iter()
        .map(|(id, f)| KrylovQuery::new(id.clone(), f.clone(), lambda))
        .collect();
    krylov_batch(model, a, &queries, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frozen() -> LevyModel {
        LevyModel::compound_poisson(0.0, &[]).unwrap()
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let g = uniform_time_grid(1.3, 0.1);
        let w = trapezoid_weights(&g);
        assert!((w.iter().sum::<f64>() - 1.3).abs() < 1e-14);
    }

    #[test]
    fn horizon_covers_short_supports() {
        let f = TestFunction::indicator(SupportBox::new(0.0, 0.5, 0.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!(auto_horizon(&f, 1.0, 0.0, 10.0, 0.01), 0.5);
        assert_eq!(truncation_bound(&f, 1.0, 0.0, 0.5), 0.0);
        let long = TestFunction::indicator(SupportBox::new(0.0, 100.0, 0.0, 1.0).unwrap(), 1.0).unwrap();
        let h = auto_horizon(&long, 1.0, 0.0, 1.0, 0.01);
        let tb = truncation_bound(&long, 1.0, 0.0, h);
        assert!((tb - 0.01 * l2_norm(&long)).abs() < 1e-12);
    }

    #[test]
    fn zero_function_gives_exact_zero() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let f = TestFunction::indicator(SupportBox::new(0.0, 1.0, 0.0, 1.0).unwrap(), 0.0).unwrap();
        let r = krylov_mc(&m, &DriftSpec::zero(), &f, 1.0, 0.0, 0.0, None, &KrylovConfig::new(50, 1)).unwrap();
        assert_eq!(r.lhs_estimate, 0.0);
        assert_eq!(r.lhs_ci_halfwidth, 0.0);
        assert_eq!(r.verdict, Outcome::Pass);
    }

    #[test]
    fn deterministic_motion_matches_closed_form() {
        let model = frozen();
        let lambda = 1.5;
        let x0 = 0.3;
        let f = TestFunction::indicator(SupportBox::new(0.0, 1.0, x0 - 1.0, x0 + 1.0).unwrap(), 1.0).unwrap();
        let r = krylov_mc(&model, &DriftSpec::zero(), &f, lambda, 0.0, x0, None, &KrylovConfig::new(4, 0)).unwrap();
        let exact = (1.0 - (-lambda).exp()) / lambda;
        // trapezoid error O(dt²) on a smooth integrand
        assert!((r.lhs_estimate - exact).abs() < 1e-7, "{} vs {exact}", r.lhs_estimate);
    }

    #[test]
    fn refuses_lambda_below_threshold() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let f = TestFunction::indicator(SupportBox::new(0.0, 1.0, 0.0, 1.0).unwrap(), 1.0).unwrap();
        let a = DriftSpec::sign(1.0).unwrap();
        let err = krylov_mc(&m, &a, &f, 0.5, 0.0, 0.0, None, &KrylovConfig::new(10, 0)).unwrap_err();
        assert!(matches!(err, Error::LambdaBelowThreshold { .. }));
    }

    #[test]
    fn local_estimate_exact_zeros() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let a = DriftSpec::sign(1.0).unwrap();
        let outside = TestFunction::indicator(SupportBox::new(0.0, 1.0, 5.0, 7.0).unwrap(), 1.0).unwrap();
        let cfg = KrylovConfig::new(200, 4);
        let r = krylov_local_mc(&m, &a, &outside, 5.0, 1.0, 0.0, 2.0, &cfg).unwrap();
        assert_eq!(r.lhs_estimate, 0.0);
        let inside = TestFunction::indicator(SupportBox::new(0.0, 1.0, -1.0, 1.0).unwrap(), 1.0).unwrap();
        let r = krylov_local_mc(&m, &a, &inside, 0.5, 1.0, 0.7, 2.0, &cfg).unwrap();
        assert_eq!(r.lhs_estimate, 0.0);
    }

    #[test]
    fn resolvent_of_zero_is_zero_and_padding_is_enforced() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let b = SupportBox::new(0.0, 1.0, -0.5, 0.5).unwrap();
        let zero = TestFunction::indicator(b, 0.0).unwrap();
        let g = ResolventGrid::around(b, 2.5, 2.5, 64, 64);
        let v = resolvent_oracle(&m, &zero, 1.0, &g).unwrap();
        assert_eq!(v.sup(), 0.0);
        let tight = ResolventGrid::around(b, 1.0, 2.5, 64, 64);
        assert!(matches!(resolvent_oracle(&m, &zero, 1.0, &tight), Err(Error::Grid(_))));
    }

    #[test]
    fn sweep_family_has_ten_members_with_expected_norms() {
        let fam = default_sweep_family();
        assert_eq!(fam.len(), 10);
        for (id, f) in &fam[..4] {
            let delta: f64 = id.trim_start_matches("box_delta_").parse().unwrap();
            assert!((l2_norm(f) - delta).abs() < 1e-15);
        }
    }
}
