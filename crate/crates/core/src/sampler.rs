//! Increment and path sampling for Lévy processes.
//!
//! Symmetric stable jumps use the Chambers–Mallows–Stuck transform, atomic
//! Lévy measures are sampled as compound Poisson, and general densities keep
//! the jumps with `|z| ≥ δ` (inverse tail-mass table) and replace the rest
//! by their compensating drift.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{DensityMeasure, LevyMeasure, LevyModel};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};

/// Seed plus stream id of a counter-based generator. Equal pairs replay
/// identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream `offset` positions further along.
    pub fn offset(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(offset),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Levy,
    Solution,
}

/// A realised trajectory on a time grid; `values[k]` is the state at
/// `t_grid[k]` and the path is constant in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PathKind,
}

impl SamplePath {
    pub fn new(t_grid: Vec<f64>, values: Vec<f64>, kind: PathKind) -> Result<Self> {
        if t_grid.len() != values.len() || t_grid.is_empty() {
            return Err(Error::InvalidParameter("time grid and values must be nonempty and of equal length".into()));
        }
        validate_time_grid(&t_grid)?;
        if kind == PathKind::Levy && values[0] != 0.0 {
            return Err(Error::InvalidParameter("a Lévy path starts at 0".into()));
        }
        Ok(Self { t_grid, values, kind })
    }

    /// State at time `t` under the right-continuous step convention.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.t_grid.partition_point(|&s| s <= t);
        self.values[k.saturating_sub(1)]
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (t, v) in self.t_grid.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }
}

pub(crate) fn validate_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Sampler settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Jumps below this size are replaced by their compensator drift.
    pub truncation: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { truncation: 1e-3 }
    }
}

/// Inverse of the tail mass `u ↦ ∫_u^∞ ρ` for one sign of jumps.
#[derive(Debug, Clone)]
struct TailTable {
    mass: f64,
    log_u: Vec<f64>,
    /// `log` of the tail mass at `log_u`, decreasing.
    log_tail: Vec<f64>,
    /// Power-law decay used beyond the table, if any.
    tail_exponent: Option<f64>,
}

impl TailTable {
    fn build(d: &DensityMeasure, sign: f64, delta: f64) -> Result<Option<Self>> {
        let h = |u: f64| d.eval(sign * u);
        let mass = d.integral_beyond(&h, delta)?;
        if !(mass > 0.0) {
            return Ok(None);
        }
        let mut log_u = Vec::new();
        let mut log_tail = Vec::new();
        let per_decade = 40;
        let step = 10f64.powf(1.0 / per_decade as f64);
        let mut u = delta;
        let mut tail = mass;
        while tail > 1e-14 * mass && u < 1e12 {
            log_u.push(u.ln());
            log_tail.push(tail.ln());
            u *= step;
            tail = d.integral_beyond(&h, u)?;
        }
        Ok(Some(Self {
            mass,
            log_u,
            log_tail,
            tail_exponent: d.hints.tail_exponent,
        }))
    }

    /// Jump size with tail mass `p·mass`, `p ∈ (0, 1)`.
    fn invert(&self, p: f64) -> f64 {
        let target = (p * self.mass).ln();
        let n = self.log_tail.len();
        let last = self.log_tail[n - 1];
        if target <= last {
            return match self.tail_exponent {
                Some(g) => (self.log_u[n - 1] + (last - target) / g).exp(),
                None => self.log_u[n - 1].exp(),
            };
        }
        // log_tail is decreasing; find the bracketing cell
        let k = self.log_tail.partition_point(|&lt| lt > target).max(1);
        let (t0, t1) = (self.log_tail[k - 1], self.log_tail[k]);
        let w = (target - t0) / (t1 - t0);
        (self.log_u[k - 1] + w * (self.log_u[k] - self.log_u[k - 1])).exp()
    }
}

#[derive(Debug, Clone)]
enum JumpPart {
    None,
    Stable { alpha: f64, scale: f64 },
    Atoms { rate: f64, atoms: Vec<(f64, f64)>, compensator: f64 },
    Truncated {
        plus: Option<TailTable>,
        minus: Option<TailTable>,
        compensator: f64,
        neglected_variance: f64,
    },
}

/// Increment sampler for a fixed model; construction does any tabulation.
#[derive(Debug, Clone)]
pub struct LevySampler {
    c: f64,
    q: f64,
    jumps: JumpPart,
}

impl LevySampler {
    pub fn new(model: &LevyModel, opts: &SamplerOptions) -> Result<Self> {
        let jumps = match model.measure() {
            LevyMeasure::PointMasses(atoms) => {
                let live: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
                if live.is_empty() {
                    JumpPart::None
                } else {
                    let rate = live.iter().map(|a| a.1).sum();
                    let compensator = live.iter().filter(|a| a.0.abs() < 1.0).map(|a| a.0 * a.1).sum();
                    JumpPart::Atoms {
                        rate,
                        atoms: live,
                        compensator,
                    }
                }
            }
            LevyMeasure::StableDensity { alpha, scale } => JumpPart::Stable {
                alpha: *alpha,
                scale: *scale,
            },
            LevyMeasure::Density(d) => Self::truncated(d, opts.truncation)?,
        };
        Ok(Self {
            c: model.c(),
            q: model.q(),
            jumps,
        })
    }

    fn truncated(d: &DensityMeasure, delta: f64) -> Result<JumpPart> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("truncation must lie in (0, 1), got {delta}")));
        }
        let plus = TailTable::build(d, 1.0, delta)?;
        let minus = TailTable::build(d, -1.0, delta)?;
        let opts = AdaptiveOptions::default();
        let compensator = if d.hints.symmetric {
            0.0
        } else {
            integrate_adaptive(
                |s| {
                    let u = s.exp();
                    u * u * (d.eval(u) - d.eval(-u))
                },
                delta.ln(),
                0.0,
                opts,
            )?
            .value
        };
        let p = 1.0 / (2.0 - d.hints.zero_exponent);
        let neglected_variance = integrate_adaptive(
            |w| {
                if w <= 0.0 {
                    return 0.0;
                }
                let u = delta * w.powf(p);
                u * u * (d.eval(u) + d.eval(-u)) * delta * p * w.powf(p - 1.0)
            },
            0.0,
            1.0,
            opts,
        )?
        .value;
        Ok(JumpPart::Truncated {
            plus,
            minus,
            compensator,
            neglected_variance,
        })
    }

    /// Variance per unit time of the jumps dropped by truncation; zero for
    /// exact samplers.
    pub fn neglected_variance(&self) -> f64 {
        match &self.jumps {
            JumpPart::Truncated { neglected_variance, .. } => *neglected_variance,
            _ => 0.0,
        }
    }

    /// One draw distributed as `S_dt`.
    pub fn sample<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        debug_assert!(dt > 0.0);
        let mut x = -self.c * dt;
        if self.q > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.q * dt).sqrt() * z;
        }
        match &self.jumps {
            JumpPart::None => {}
            JumpPart::Stable { alpha, scale } => {
                x += scale * dt.powf(1.0 / alpha) * chambers_mallows_stuck(*alpha, rng);
            }
            JumpPart::Atoms {
                rate,
                atoms,
                compensator,
            } => {
                x -= dt * compensator;
                let n = poisson_count(rate * dt, rng);
                for _ in 0..n {
                    let mut pick = rng.random::<f64>() * rate;
                    let mut z = atoms[atoms.len() - 1].0;
                    for &(zi, wi) in atoms {
                        if pick < wi {
                            z = zi;
                            break;
                        }
                        pick -= wi;
                    }
                    x += z;
                }
            }
            JumpPart::Truncated {
                plus,
                minus,
                compensator,
                ..
            } => {
                x -= dt * compensator;
                let mp = plus.as_ref().map_or(0.0, |t| t.mass);
                let mm = minus.as_ref().map_or(0.0, |t| t.mass);
                let n = poisson_count((mp + mm) * dt, rng);
                for _ in 0..n {
                    let side: f64 = rng.random::<f64>() * (mp + mm);
                    let p: f64 = rng.sample(Open01);
                    if side < mp {
                        x += plus.as_ref().expect("positive mass").invert(p);
                    } else {
                        x -= minus.as_ref().expect("negative mass").invert(p);
                    }
                }
            }
        }
        x
    }

    /// Increments over consecutive intervals of `t_grid`.
    pub fn increments<R: Rng + ?Sized>(&self, t_grid: &[f64], rng: &mut R) -> Vec<f64> {
        t_grid.windows(2).map(|w| self.sample(w[1] - w[0], rng)).collect()
    }

    /// Path of `S` on `t_grid` as cumulative sums of independent increments.
    pub fn path<R: Rng + ?Sized>(&self, t_grid: &[f64], rng: &mut R) -> Result<SamplePath> {
        validate_time_grid(t_grid)?;
        let inc = self.increments(t_grid, rng);
        let values = cumulative(&inc);
        SamplePath::new(t_grid.to_vec(), values, PathKind::Levy)
    }
}

/// `[0, s₁, s₁+s₂, …]`.
pub(crate) fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for d in increments {
        acc += d;
        out.push(acc);
    }
    out
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

/// Standard symmetric α-stable variate with `E e^{iξZ} = e^{−|ξ|^α}`.
pub fn chambers_mallows_stuck<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// One draw of `S_dt` from a fresh sampler; prefer [`LevySampler`] in loops.
pub fn sample_increment(model: &LevyModel, dt: f64, stream: RngStream) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    Ok(sampler.sample(dt, &mut stream.rng()))
}

/// Path of `S` on `t_grid` driven by `stream`.
pub fn sample_path(model: &LevyModel, t_grid: &[f64], stream: RngStream) -> Result<SamplePath> {
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    sampler.path(t_grid, &mut stream.rng())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcfRow {
    pub xi: f64,
    pub ecf_re: f64,
    pub ecf_im: f64,
    pub theory_re: f64,
    pub theory_im: f64,
    pub abs_dev: f64,
}

/// Empirical versus theoretical characteristic function of `S_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfReport {
    pub t: f64,
    pub n_paths: usize,
    pub rows: Vec<EcfRow>,
    pub max_deviation: f64,
    /// The `4/√n` acceptance line.
    pub reference: f64,
}

impl EcfReport {
    pub fn passes(&self) -> bool {
        self.max_deviation < self.reference
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,ecf_re,ecf_im,theory_re,theory_im,abs_dev")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.xi, r.ecf_re, r.ecf_im, r.theory_re, r.theory_im, r.abs_dev
            )?;
        }
        Ok(())
    }
}

/// Draws `S_t` once per stream `base.offset(j)`, `j < n_paths`.
pub fn terminal_draws(sampler: &LevySampler, t: f64, n_paths: usize, base: RngStream) -> Vec<f64> {
    (0..n_paths)
        .into_par_iter()
        .map(|j| sampler.sample(t, &mut base.offset(j as u64).rng()))
        .collect()
}

/// Compares `(1/n)Σ e^{iξS_t^{(j)}}` with `e^{−tψ(ξ)}` on `xi_grid`.
pub fn ecf_report(
    model: &LevyModel,
    t: f64,
    n_paths: usize,
    xi_grid: &[f64],
    base: RngStream,
) -> Result<EcfReport> {
    if n_paths < 10_000 {
        return Err(Error::InvalidParameter(format!("ecf report needs at least 1e4 paths, got {n_paths}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let draws = terminal_draws(&sampler, t, n_paths, base);
    ecf_from_draws(model, t, &draws, xi_grid)
}

pub fn ecf_from_draws(model: &LevyModel, t: f64, draws: &[f64], xi_grid: &[f64]) -> Result<EcfReport> {
    let n = draws.len();
    let mut rows = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let (mut re, mut im) = (0.0, 0.0);
        for &s in draws {
            let (sn, cs) = (xi * s).sin_cos();
            re += cs;
            im += sn;
        }
        let ecf = Complex64::new(re / n as f64, im / n as f64);
        let theory = (-t * model.psi(xi)?).exp();
        rows.push(EcfRow {
            xi,
            ecf_re: ecf.re,
            ecf_im: ecf.im,
            theory_re: theory.re,
            theory_im: theory.im,
            abs_dev: (ecf - theory).norm(),
        });
    }
    let max_deviation = rows.iter().map(|r| r.abs_dev).fold(0.0, f64::max);
    Ok(EcfReport {
        t,
        n_paths: n,
        rows,
        max_deviation,
        reference: 4.0 / (n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_drift_is_deterministic() {
        let m = LevyModel::compound_poisson(0.0, &[]).unwrap().with_drift(0.7).unwrap();
        let x = sample_increment(&m, 2.0, RngStream::new(1, 0)).unwrap();
        assert!((x + 1.4).abs() < 1e-15);
    }

    #[test]
    fn zero_model_gives_zero_path() {
        let m = LevyModel::compound_poisson(0.0, &[]).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let p = sample_path(&m, &grid, RngStream::new(3, 9)).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert_eq!(p.kind, PathKind::Levy);
    }

    #[test]
    fn single_interval_path_is_one_increment() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let s = RngStream::new(11, 4);
        let p = sample_path(&m, &[0.0, 0.8], s).unwrap();
        let x = sample_increment(&m, 0.8, s).unwrap();
        assert_eq!(p.values, vec![0.0, x]);
    }

    #[test]
    fn streams_reproduce_bit_exactly() {
        let m = LevyModel::symmetric_stable(1.3, 1.0).unwrap();
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.02).collect();
        let a = sample_path(&m, &grid, RngStream::new(5, 17)).unwrap();
        let b = sample_path(&m, &grid, RngStream::new(5, 17)).unwrap();
        let c = sample_path(&m, &grid, RngStream::new(5, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_variance_is_q_t() {
        let m = LevyModel::gaussian(2.0).unwrap();
        let sampler = LevySampler::new(&m, &SamplerOptions::default()).unwrap();
        let draws = terminal_draws(&sampler, 1.0, 100_000, RngStream::new(21, 0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((var - 2.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn rejects_bad_grids_and_dt() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        assert!(sample_increment(&m, 0.0, RngStream::new(0, 0)).is_err());
        assert!(sample_path(&m, &[0.0, 0.5, 0.5], RngStream::new(0, 0)).is_err());
        assert!(sample_path(&m, &[0.1, 0.5], RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn deterministic_model_has_zero_ecf_deviation() {
        let m = LevyModel::compound_poisson(0.0, &[]).unwrap().with_drift(0.3).unwrap();
        let xi: Vec<f64> = (-5..=5).map(f64::from).collect();
        let r = ecf_report(&m, 1.0, 10_000, &xi, RngStream::new(1, 0)).unwrap();
        assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
    }

    #[test]
    fn truncated_sampler_matches_exponent() {
        let d = DensityMeasure::tempered_stable(1.0, 1.2, 2.0).unwrap();
        let m = LevyModel::new(0.0, 0.0, LevyMeasure::Density(d)).unwrap();
        let xi: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let r = ecf_report(&m, 1.0, 50_000, &xi, RngStream::new(8, 0)).unwrap();
        assert!(r.passes(), "{} vs {}", r.max_deviation, r.reference);
        let sampler = LevySampler::new(&m, &SamplerOptions::default()).unwrap();
        // ∫_{|z|<δ} z² ν(dz) ≈ 2δ^{2−α}/(2−α) for small δ
        let delta: f64 = SamplerOptions::default().truncation;
        let approx = 2.0 * delta.powf(0.8) / 0.8;
        let v = sampler.neglected_variance();
        assert!((v / approx - 1.0).abs() < 0.01, "{v} vs {approx}");
    }

    #[test]
    fn asymmetric_atoms_match_exponent() {
        let m = LevyModel::compound_poisson(2.0, &[(0.4, 0.5), (-1.5, 0.5)])
            .unwrap()
            .with_drift(-0.2)
            .unwrap();
        let xi: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let r = ecf_report(&m, 1.0, 50_000, &xi, RngStream::new(2, 0)).unwrap();
        assert!(r.passes(), "{} vs {}", r.max_deviation, r.reference);
    }
}
