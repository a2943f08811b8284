//! One-dimensional Lévy processes given by their characteristic triple
//! `(c, Q, ν)`.
//!
//! The characteristic exponent is
//!
//! ```text
//! ψ(ξ) = icξ + ½Qξ² + ∫ (1 − e^{iξz} + iξz·1{|z|<1}) ν(dz)
//! ```
//!
//! so that `E e^{iξS_t} = e^{−tψ(ξ)}`. Besides evaluating `ψ`, this module
//! decides the growth condition `Re ψ(ξ)/|ξ| → ∞` on a finite grid and
//! computes the two constants that drive the L₂ estimates: the discount
//! threshold `λ₀` and the integral `N₁(λ) = π∫ dξ/(λ + Re ψ(ξ))`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{apply_multiplier_1d, GridFunction1};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, GaussLegendre};

/// Behaviour of a Lévy density at the origin and at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityHints {
    /// `β` with `ν(z) ≍ |z|^{−1−β}` near zero; must lie in `[0, 2)`.
    pub zero_exponent: f64,
    /// `γ` with `ν(z) ≍ |z|^{−1−γ}` at infinity, or `None` when the density
    /// decays faster than any power.
    pub tail_exponent: Option<f64>,
    /// `ν(z) = ν(−z)`; the imaginary part of the jump integral vanishes.
    pub symmetric: bool,
}

/// A Lévy measure with a density on `ℝ∖{0}`.
#[derive(Clone)]
pub struct DensityMeasure {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub hints: DensityHints,
    pub label: String,
}

impl fmt::Debug for DensityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMeasure")
            .field("label", &self.label)
            .field("hints", &self.hints)
            .finish()
    }
}

impl DensityMeasure {
    pub fn new<F>(label: impl Into<String>, density: F, hints: DensityHints) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(0.0..2.0).contains(&hints.zero_exponent) {
            return Err(Error::InvalidParameter(format!(
                "zero exponent must lie in [0, 2), got {}",
                hints.zero_exponent
            )));
        }
        if let Some(g) = hints.tail_exponent {
            if !(g > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tail exponent must be positive, got {g}"
                )));
            }
        }
        Ok(Self {
            density: Arc::new(density),
            hints,
            label: label.into(),
        })
    }

    /// `ν(z) = C|z|^{−1−α}` with `C` chosen so the exponent is `(σ|ξ|)^α`.
    pub fn symmetric_stable(alpha: f64, scale: f64) -> Result<Self> {
        let c = stable_density_constant(alpha, scale)?;
        Self::new(
            format!("stable_density(alpha={alpha}, scale={scale})"),
            move |z: f64| c * z.abs().powf(-1.0 - alpha),
            DensityHints {
                zero_exponent: alpha,
                tail_exponent: Some(alpha),
                symmetric: true,
            },
        )
    }

    /// Symmetric tempered stable density `c|z|^{−1−α}e^{−κ|z|}`.
    pub fn tempered_stable(c: f64, alpha: f64, kappa: f64) -> Result<Self> {
        if !(c >= 0.0) || !(kappa > 0.0) || !(alpha >= 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "tempered stable needs c >= 0, kappa > 0, alpha in [0, 2); got c={c}, alpha={alpha}, kappa={kappa}"
            )));
        }
        Self::new(
            format!("tempered_stable(c={c}, alpha={alpha}, kappa={kappa})"),
            move |z: f64| {
                let u = z.abs();
                c * u.powf(-1.0 - alpha) * (-kappa * u).exp()
            },
            DensityHints {
                zero_exponent: alpha,
                tail_exponent: None,
                symmetric: true,
            },
        )
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.density)(z)
    }

    fn sym(&self, u: f64) -> f64 {
        self.eval(u) + self.eval(-u)
    }

    fn antisym(&self, u: f64) -> f64 {
        self.eval(u) - self.eval(-u)
    }

    fn zero_power(&self) -> f64 {
        1.0 / (2.0 - self.hints.zero_exponent)
    }

    fn tail_power(&self) -> f64 {
        self.hints.tail_exponent.map_or(1.0, |g| 1.0 / g.min(1.0).max(1e-3)).max(1.0)
    }

    /// `∫_a^∞ h(u) du` for `a > 0` and a density-like `h` on `(0, ∞)`.
    pub(crate) fn integral_beyond(&self, h: &dyn Fn(f64) -> f64, a: f64) -> Result<f64> {
        let opts = quad_opts();
        let mut total = 0.0;
        let start = if a < 1.0 {
            // log substitution flattens power laws
            let inner = integrate_adaptive(
                |s| {
                    let u = s.exp();
                    h(u) * u
                },
                a.ln(),
                0.0,
                opts,
            )?;
            total += inner.value;
            1.0
        } else {
            a
        };
        // u = start·y^{−q}: power tails become bounded integrands in y
        let q = self.tail_power();
        let outer = integrate_adaptive(
            |y| {
                if y <= 0.0 {
                    return 0.0;
                }
                let u = start * y.powf(-q);
                let v = h(u) * start * q * y.powf(-q - 1.0);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            opts,
        )?;
        Ok(total + outer.value)
    }

    /// `∫_{0}^{b} h(u) du` with `h(u) ≍ u^{1−β}` near zero.
    fn integral_near_zero(&self, h: &dyn Fn(f64) -> f64, b: f64) -> Result<f64> {
        let p = self.zero_power();
        let r = integrate_adaptive(
            |w| {
                if w <= 0.0 {
                    return 0.0;
                }
                let u = b * w.powf(p);
                h(u) * b * p * w.powf(p - 1.0)
            },
            0.0,
            1.0,
            quad_opts(),
        )?;
        Ok(r.value)
    }

    /// Checks the declared power laws against the density itself at
    /// `|z| = 10^{−7}` and `|z| = 10^{6}`, one decade apart.
    fn verify_hints(&self) -> Result<()> {
        let slack = 1.05;
        let (a, b) = (self.sym(1e-8), self.sym(1e-7));
        if b > 0.0 && a / b > 10f64.powf(1.0 + self.hints.zero_exponent) * slack {
            return Err(Error::InvalidParameter(format!(
                "{}: density grows faster near zero than |z|^(-1-{})",
                self.label, self.hints.zero_exponent
            )));
        }
        let gamma = self.hints.tail_exponent.unwrap_or(2.0);
        let (a, b) = (self.sym(1e6), self.sym(1e7));
        if a > 0.0 && b / a > 10f64.powf(-1.0 - gamma) * slack {
            return Err(Error::InvalidParameter(format!(
                "{}: density decays slower at infinity than |z|^(-1-{gamma})",
                self.label
            )));
        }
        Ok(())
    }

    /// `∫(1 ∧ z²) ν(dz)`.
    pub fn integrability_mass(&self) -> Result<f64> {
        self.verify_hints()?;
        let near = self.integral_near_zero(&|u| u * u * self.sym(u), 1.0)?;
        let far = self.integral_beyond(&|u| self.sym(u), 1.0)?;
        Ok(near + far)
    }

    /// Jump part of `ψ(ξ)` for `ξ > 0`.
    fn jump_exponent(&self, xi: f64) -> Result<Complex64> {
        const PERIODS: f64 = 4.0;
        let u_cos = (PERIODS + 0.5) * PI / xi;
        let near = self.integral_near_zero(&|u| one_minus_cos(xi * u) * self.sym(u), u_cos)?;
        let mass = self.integral_beyond(&|u| self.sym(u), u_cos)?;
        let osc = oscillatory_tail(&|u| self.sym(u), xi, u_cos, Trig::Cos);
        let re = near + mass - osc;
        if self.hints.symmetric {
            return Ok(Complex64::new(re, 0.0));
        }
        let u_sin = PERIODS * PI / xi;
        let d = |u: f64| self.antisym(u);
        let im = if u_sin <= 1.0 {
            let a = self.integral_near_zero(&|u| x_minus_sin(xi * u) * d(u), u_sin)?;
            let b = integrate_adaptive(|s| {
                let u = s.exp();
                xi * u * d(u) * u
            }, u_sin.ln(), 0.0, quad_opts())?
            .value;
            a + b - oscillatory_tail(&d, xi, u_sin, Trig::Sin)
        } else {
            let a = self.integral_near_zero(&|u| x_minus_sin(xi * u) * d(u), 1.0)?;
            let b = integrate_adaptive(|u| (xi * u).sin() * d(u), 1.0, u_sin, quad_opts())?.value;
            a - b - oscillatory_tail(&d, xi, u_sin, Trig::Sin)
        };
        Ok(Complex64::new(re, im))
    }
}

fn quad_opts() -> AdaptiveOptions {
    AdaptiveOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_segments: 2000,
    }
}

/// `1 − cos x` without cancellation.
fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `x − sin x` with a Taylor series near zero.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x - x.sin()
    }
}

#[derive(Clone, Copy)]
enum Trig {
    Cos,
    Sin,
}

/// `∫_{start}^∞ trig(ωu) h(u) du` where `start` is a zero of `trig(ω·)`.
///
/// Sums half-period integrals and extrapolates the alternating partial sums
/// by repeated pairwise averaging.
fn oscillatory_tail(h: &dyn Fn(f64) -> f64, omega: f64, start: f64, trig: Trig) -> f64 {
    const WARMUP: usize = 12;
    const AVERAGED: usize = 24;
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(24);
    }
    let half = PI / omega;
    RULE.with(|rule| {
        let mut partial = 0.0;
        let mut sums = Vec::with_capacity(AVERAGED);
        for k in 0..WARMUP + AVERAGED {
            let a = start + half * k as f64;
            partial += rule.integrate(a, a + half, |u| {
                let w = match trig {
                    Trig::Cos => (omega * u).cos(),
                    Trig::Sin => (omega * u).sin(),
                };
                w * h(u)
            });
            if k >= WARMUP {
                sums.push(partial);
            }
        }
        while sums.len() > 1 {
            sums = sums.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        sums[0]
    })
}

/// `∫_0^∞ (1 − cos v) v^{−1−α} dv`.
fn stable_integral(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        PI / 2.0
    } else {
        // Γ(−α)·cos(πα/2) through Γ(2−α) to stay away from the poles
        let g = statrs::function::gamma::gamma(2.0 - alpha) / (alpha * (alpha - 1.0));
        -g * (PI * alpha / 2.0).cos()
    }
}

fn stable_density_constant(alpha: f64, scale: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "stable density needs alpha in (0, 2) and scale > 0; got alpha={alpha}, scale={scale}"
        )));
    }
    Ok(scale.powf(alpha) / (2.0 * stable_integral(alpha)))
}

/// Lévy measure variants.
#[derive(Debug, Clone)]
pub enum LevyMeasure {
    /// Atoms `(z_i, w_i)`: jumps of size `z_i` at rate `w_i`.
    PointMasses(Vec<(f64, f64)>),
    /// Symmetric α-stable density normalised to exponent `(σ|ξ|)^α`.
    StableDensity { alpha: f64, scale: f64 },
    Density(DensityMeasure),
}

impl LevyMeasure {
    /// Density view of the measure, if it has one.
    pub fn density(&self) -> Option<Result<DensityMeasure>> {
        match self {
            LevyMeasure::PointMasses(_) => None,
            LevyMeasure::StableDensity { alpha, scale } => {
                Some(DensityMeasure::symmetric_stable(*alpha, *scale))
            }
            LevyMeasure::Density(d) => Some(Ok(d.clone())),
        }
    }
}

/// Closed-form shortcut used when evaluating `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    SymmetricStable { alpha: f64, scale: f64 },
    CompoundPoisson,
    Custom,
}

/// Serializable Lévy measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    /// `(z, w)` pairs: jumps of size `z` at rate `w`.
    PointMasses { masses: Vec<(f64, f64)> },
    StableDensity { alpha: f64, scale: f64 },
    /// `c·e^{−κ|z|}/|z|^{1+α}`.
    TemperedStable { c: f64, alpha: f64, kappa: f64 },
}

/// Serializable model: `{"c": .., "Q": .., "nu": {..}, "closed_form": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyModelConfig {
    #[serde(default)]
    pub c: f64,
    #[serde(rename = "Q", default)]
    pub q: f64,
    pub nu: MeasureConfig,
    /// `custom` forces quadrature of the exponent; other tags must agree
    /// with the measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedForm>,
}

impl LevyModelConfig {
    pub fn build(&self) -> Result<LevyModel> {
        let nu = match &self.nu {
            MeasureConfig::PointMasses { masses } => LevyMeasure::PointMasses(masses.clone()),
            MeasureConfig::StableDensity { alpha, scale } => {
                if self.closed_form == Some(ClosedForm::Custom) {
                    LevyMeasure::Density(DensityMeasure::symmetric_stable(*alpha, *scale)?)
                } else {
                    LevyMeasure::StableDensity {
                        alpha: *alpha,
                        scale: *scale,
                    }
                }
            }
            MeasureConfig::TemperedStable { c, alpha, kappa } => {
                LevyMeasure::Density(DensityMeasure::tempered_stable(*c, *alpha, *kappa)?)
            }
        };
        let model = LevyModel::new(self.c, self.q, nu)?;
        if let Some(tag) = self.closed_form {
            if tag != model.closed_form() {
                return Err(Error::InvalidParameter(format!(
                    "closed_form {tag:?} does not match the measure ({:?})",
                    model.closed_form()
                )));
            }
        }
        Ok(model)
    }
}

/// A Lévy process `S` with `S₀ = 0`.
#[derive(Debug, Clone)]
pub struct LevyModel {
    c: f64,
    q: f64,
    nu: LevyMeasure,
    closed_form: ClosedForm,
}

impl LevyModel {
    pub fn new(c: f64, q: f64, nu: LevyMeasure) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("drift c must be finite, got {c}")));
        }
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("Gaussian coefficient Q must be >= 0, got {q}")));
        }
        let closed_form = match &nu {
            LevyMeasure::PointMasses(atoms) => {
                for &(z, w) in atoms {
                    if !(z != 0.0 && z.is_finite()) {
                        return Err(Error::InvalidParameter(format!("atom location must be finite and nonzero, got {z}")));
                    }
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::InvalidParameter(format!("atom weight must be >= 0, got {w}")));
                    }
                }
                ClosedForm::CompoundPoisson
            }
            LevyMeasure::StableDensity { alpha, scale } => {
                stable_density_constant(*alpha, *scale)?;
                ClosedForm::SymmetricStable {
                    alpha: *alpha,
                    scale: *scale,
                }
            }
            LevyMeasure::Density(d) => {
                let mass = d.integrability_mass()?;
                if !mass.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "{}: integral of (1 ∧ z²) against the density is not finite",
                        d.label
                    )));
                }
                ClosedForm::Custom
            }
        };
        Ok(Self {
            c,
            q,
            nu,
            closed_form,
        })
    }

    /// Symmetric α-stable process with `ψ(ξ) = (σ|ξ|)^α`.
    pub fn symmetric_stable(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(0.0, 0.0, LevyMeasure::StableDensity { alpha, scale })
    }

    /// Compound Poisson process with the given total rate and jump law
    /// `(size, probability)`.
    pub fn compound_poisson(rate: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate}")));
        }
        let total: f64 = jumps.iter().map(|j| j.1).sum();
        if rate > 0.0 && (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "jump probabilities must sum to 1, got {total}"
            )));
        }
        let atoms = jumps.iter().map(|&(z, p)| (z, rate * p)).collect();
        Self::new(0.0, 0.0, LevyMeasure::PointMasses(atoms))
    }

    /// Brownian-type model `ψ(ξ) = ½Qξ²`.
    pub fn gaussian(q: f64) -> Result<Self> {
        Self::new(0.0, q, LevyMeasure::PointMasses(Vec::new()))
    }

    pub fn with_drift(mut self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("drift c must be finite, got {c}")));
        }
        self.c = c;
        Ok(self)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.nu
    }

    pub fn closed_form(&self) -> ClosedForm {
        self.closed_form
    }

    /// The characteristic exponent `ψ(ξ)`.
    ///
    /// Closed forms are used where available; densities go through
    /// [`LevyModel::psi_levy_khintchine`].
    pub fn psi(&self, xi: f64) -> Result<Complex64> {
        match self.closed_form {
            ClosedForm::SymmetricStable { alpha, scale } => {
                let base = Complex64::new(0.5 * self.q * xi * xi, self.c * xi);
                Ok(base + (scale * xi.abs()).powf(alpha))
            }
            _ => self.psi_levy_khintchine(xi),
        }
    }

    /// `ψ(ξ)` from the Lévy–Khintchine integral, ignoring closed forms.
    pub fn psi_levy_khintchine(&self, xi: f64) -> Result<Complex64> {
        if xi == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = xi.abs();
        let jump = match &self.nu {
            LevyMeasure::PointMasses(atoms) => atoms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(z, w)| {
                let comp = if z.abs() < 1.0 { a * z } else { 0.0 };
                acc + w * Complex64::new(one_minus_cos(a * z), comp - (a * z).sin())
            }),
            other => {
                let d = other.density().expect("non-atomic measures have densities")?;
                d.jump_exponent(a)?
            }
        };
        let value = Complex64::new(0.5 * self.q * a * a, self.c * a) + jump;
        // ψ(−ξ) = conj ψ(ξ) holds exactly by construction
        Ok(if xi < 0.0 { value.conj() } else { value })
    }

    pub fn re_psi(&self, xi: f64) -> Result<f64> {
        Ok(self.psi(xi)?.re)
    }
}

/// Dyadic frequency grid `ξ_min·2^k ≤ ξ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub xi_min: f64,
    pub xi_max: f64,
}

impl Default for DyadicGrid {
    fn default() -> Self {
        Self {
            xi_min: 1.0,
            xi_max: 1e6,
        }
    }
}

impl DyadicGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut xi = self.xi_min;
        while xi <= self.xi_max * (1.0 + 1e-12) {
            out.push(xi);
            xi *= 2.0;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi_min > 0.0) || !(self.xi_max / self.xi_min >= 1e3) {
            return Err(Error::Grid(format!(
                "dyadic grid must span at least three decades with xi_min > 0, got [{}, {}]",
                self.xi_min, self.xi_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds for [`check_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionOptions {
    /// Minimum of `Re ψ(ξ)/|ξ|` over the last decade required for `satisfied`.
    pub ratio_threshold: f64,
    /// Log-log slopes at or below this count as bounded growth.
    pub slope_tolerance: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            ratio_threshold: 1.0,
            slope_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub xi: f64,
    pub re_psi: f64,
    pub ratio: f64,
}

/// Evidence for or against `Re ψ(ξ)/|ξ| → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub ratio_samples: Vec<RatioSample>,
    /// Least-squares slope of `log(Re ψ/|ξ|)` against `log ξ` over the last
    /// two decades.
    pub trend_slope: f64,
    pub grid: DyadicGrid,
}

impl ConditionReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,re_psi,ratio")?;
        for s in &self.ratio_samples {
            writeln!(w, "{},{},{}", s.xi, s.re_psi, s.ratio)?;
        }
        writeln!(w, "# verdict={} trend_slope={}", self.verdict, self.trend_slope)
    }
}

/// Classifies the growth condition on a dyadic grid.
///
/// `satisfied` needs the ratio strictly increasing across the last decade
/// with its minimum above the threshold; `violated` means the fitted trend
/// over the last two decades is flat or decreasing; anything else is
/// `inconclusive`.
pub fn check_condition(
    model: &LevyModel,
    grid: &DyadicGrid,
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    grid.validate()?;
    let points = grid.points();
    let mut samples = Vec::with_capacity(points.len());
    for &xi in &points {
        let re_psi = model.re_psi(xi)?;
        samples.push(RatioSample {
            xi,
            re_psi,
            ratio: re_psi / xi,
        });
    }
    let top = points[points.len() - 1];
    let last_decade: Vec<&RatioSample> = samples.iter().filter(|s| s.xi >= top / 10.0 * (1.0 - 1e-12)).collect();
    let two_decades: Vec<&RatioSample> = samples.iter().filter(|s| s.xi >= top / 100.0 * (1.0 - 1e-12)).collect();

    let increasing = last_decade.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let min_ratio = last_decade.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let trend_slope = log_log_slope(two_decades.iter().map(|s| (s.xi, s.ratio)));

    let verdict = if increasing && min_ratio > opts.ratio_threshold {
        Verdict::Satisfied
    } else if trend_slope <= opts.slope_tolerance {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(ConditionReport {
        verdict,
        ratio_samples: samples,
        trend_slope,
        grid: *grid,
    })
}

/// Least-squares slope of `log y` against `log x`; nonpositive `y` drive it
/// to `−∞`.
fn log_log_slope(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|p| (p.0.ln(), p.1.ln())).unzip();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Search settings for [`lambda0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Options {
    pub grid: DyadicGrid,
    pub condition: ConditionOptions,
    pub floor: f64,
    /// Smallest frequency probed by the search.
    pub search_min: f64,
    pub points_per_decade: usize,
}

impl Default for Lambda0Options {
    fn default() -> Self {
        Self {
            grid: DyadicGrid::default(),
            condition: ConditionOptions::default(),
            floor: 1e-6,
            search_min: 1e-8,
            points_per_decade: 200,
        }
    }
}

/// The discount threshold `λ₀ = max(sup_ξ (2K|ξ| − Re ψ(ξ)), floor)`.
///
/// Any `λ ≥ λ₀` satisfies `(Re ψ(ξ) + λ)² ≥ 4K²ξ²` on the searched grid.
/// The supremum is located on a log grid and refined by golden-section
/// search inside the bracketing cell.
pub fn lambda0(model: &LevyModel, k: f64, opts: &Lambda0Options) -> Result<f64> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("drift bound K must be >= 0, got {k}")));
    }
    // with K = 0 the supremum is sup(−Re ψ) ≤ 0 for every model
    if k == 0.0 {
        return Ok(opts.floor);
    }
    let report = check_condition(model, &opts.grid, &opts.condition)?;
    if report.verdict != Verdict::Satisfied {
        return Err(Error::ConditionNotSatisfied {
            verdict: report.verdict.to_string(),
            detail: "sup over xi of 2K|xi| - Re psi(xi) is infinite".into(),
        });
    }
    let gap = |xi: f64| -> Result<f64> { Ok(2.0 * k * xi - model.re_psi(xi)?) };
    let decades = (opts.grid.xi_max / opts.search_min).log10();
    let n = (decades * opts.points_per_decade as f64).ceil() as usize;
    let xs: Vec<f64> = (0..=n)
        .map(|i| opts.search_min * 10f64.powf(decades * i as f64 / n as f64))
        .collect();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let g = gap(x)?;
        if g > best.1 {
            best = (i, g);
        }
    }
    if best.0 == xs.len() - 1 {
        return Err(Error::Inconclusive(format!(
            "2K|xi| - Re psi(xi) still growing at xi_max = {}; enlarge the grid",
            opts.grid.xi_max
        )));
    }
    let lo = if best.0 == 0 { 0.0 } else { xs[best.0 - 1] };
    let hi = xs[best.0 + 1];
    let refined = golden_max(&gap, lo, hi)?;
    Ok(refined.max(best.1).max(opts.floor))
}

fn golden_max(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(fc.max(fd))
}

/// Settings for [`n1_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N1Options {
    /// The core integral runs over `[0, xi_max]`; the tail is extrapolated.
    pub xi_max: f64,
    pub condition: ConditionOptions,
    /// Largest admissible share of the extrapolated tail.
    pub max_tail_fraction: f64,
}

impl Default for N1Options {
    fn default() -> Self {
        Self {
            xi_max: 1e6,
            condition: ConditionOptions::default(),
            max_tail_fraction: 0.1,
        }
    }
}

/// `N₁(λ)` together with its tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct N1Constant {
    pub value: f64,
    pub tail: f64,
    pub tail_fraction: f64,
    /// Fitted growth `Re ψ(ξ) ≈ C|ξ|^p` over the last decade.
    pub fit_coefficient: f64,
    pub fit_exponent: f64,
}

/// `N₁(λ) = π∫_ℝ dξ / (λ + Re ψ(ξ))`.
///
/// The integral over `[0, ξ_max]` is computed by adaptive quadrature on
/// dyadic blocks; beyond `ξ_max` the power-law fit of `Re ψ` is integrated
/// term by term in the expansion of `1/(λ + Cξ^p)`.
pub fn n1_constant(model: &LevyModel, lambda: f64, opts: &N1Options) -> Result<N1Constant> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let grid = DyadicGrid {
        xi_min: opts.xi_max / 1024.0,
        xi_max: opts.xi_max,
    };
    let report = check_condition(model, &grid, &opts.condition)?;
    if report.verdict != Verdict::Satisfied {
        return Err(Error::ConditionNotSatisfied {
            verdict: report.verdict.to_string(),
            detail: "the integral of 1/(lambda + Re psi) need not be finite".into(),
        });
    }

    let quad = AdaptiveOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_segments: 2000,
    };
    let mut first_err = None;
    let mut integrand = |xi: f64| match model.re_psi(xi) {
        Ok(r) => 1.0 / (lambda + r),
        Err(e) => {
            first_err.get_or_insert(e);
            0.0
        }
    };
    let mut core = 0.0;
    let mut lo = 0.0;
    let mut hi = opts.xi_max.min(1.0);
    loop {
        core += integrate_adaptive(&mut integrand, lo, hi, quad)?.value;
        if hi >= opts.xi_max {
            break;
        }
        lo = hi;
        hi = (hi * 2.0).min(opts.xi_max);
    }
    if let Some(e) = first_err {
        return Err(e);
    }

    // power-law fit over the last decade
    let fit_pts: Vec<(f64, f64)> = (0..=16)
        .map(|i| {
            let xi = opts.xi_max / 10f64.powf(1.0 - i as f64 / 16.0);
            model.re_psi(xi).map(|r| (xi, r))
        })
        .collect::<Result<_>>()?;
    let p = log_log_slope(fit_pts.iter().copied());
    let (lx, lr) = fit_pts
        .iter()
        .fold((0.0, 0.0), |acc, &(x, r)| (acc.0 + x.ln(), acc.1 + r.ln()));
    let m = fit_pts.len() as f64;
    let c_fit = ((lr - p * lx) / m).exp();
    if !(p > 1.0) {
        return Err(Error::Inconclusive(format!(
            "fitted growth exponent {p} <= 1: tail of the N1 integral does not converge"
        )));
    }
    let big = opts.xi_max;
    let ratio = lambda / (c_fit * big.powf(p));
    if ratio >= 0.5 {
        return Err(Error::Inconclusive(format!(
            "lambda / Re psi(xi_max) = {ratio}; enlarge xi_max for the tail expansion"
        )));
    }
    let mut tail = 0.0;
    let mut coef = 1.0 / c_fit;
    for j in 0..200 {
        let e = p * (j as f64 + 1.0) - 1.0;
        let term = coef * big.powf(-e) / e;
        tail += term;
        if term.abs() <= 1e-17 * tail.abs() {
            break;
        }
        coef *= -lambda / c_fit;
    }
    let half = core + tail;
    let tail_fraction = tail / half;
    if tail_fraction > opts.max_tail_fraction {
        return Err(Error::Inconclusive(format!(
            "extrapolated tail is {:.1}% of N1; enlarge xi_max",
            100.0 * tail_fraction
        )));
    }
    Ok(N1Constant {
        value: 2.0 * PI * half,
        tail: 2.0 * PI * tail,
        tail_fraction,
        fit_coefficient: c_fit,
        fit_exponent: p,
    })
}

/// Applies the generator `L` of `S` as the Fourier multiplier `−ψ(−ξ)`.
///
/// `g` must be negligible at both grid ends (below `1e−8·max|g|`) so that
/// periodic wrap-around does not alias.
pub fn apply_generator(model: &LevyModel, g: &GridFunction1) -> Result<GridFunction1> {
    let peak = g.max_abs();
    let n = g.values.len();
    let edge = g.values[0].abs().max(g.values[n - 1].abs());
    if peak > 0.0 && edge >= 1e-8 * peak {
        return Err(Error::Grid(format!(
            "grid function does not decay at the boundary (|g| = {edge:e} vs max {peak:e})"
        )));
    }
    let multipliers: Vec<Complex64> = (0..g.grid.len)
        .map(|k| model.psi(-g.grid.frequency(k)).map(|p| -p))
        .collect::<Result<_>>()?;
    Ok(apply_multiplier_1d(g, |k| multipliers[k]))
}
