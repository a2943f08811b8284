//! Mollification ladder: the SDE is solved with drifts `a * q_ε` for a
//! decreasing sequence of widths, every rung driven by the same Lévy path,
//! and consecutive rungs are compared (Cauchy form, since the limit is not
//! available). Tightness is tracked through the tail table
//! `P(sup_{s≤t}|X_s| > l)` and a displacement statistic over a
//! deterministic grid of start times.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::{mollify, DriftSpec};
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::sampler::{LevySampler, SamplePath, SamplerOptions};
use crate::sde::{euler_states, SolveConfig};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub solve: SolveConfig,
    /// Threshold of the drift-integral and displacement events.
    #[serde(default = "default_eps_tol")]
    pub eps_tol: f64,
    #[serde(default = "default_l_grid")]
    pub l_grid: Vec<f64>,
    #[serde(default = "default_r_ladder")]
    pub r_ladder: Vec<f64>,
    /// Start times of the displacement statistic, as fractions of `t_end`.
    #[serde(default = "default_tau_fractions")]
    pub tau_fractions: Vec<f64>,
}

fn default_eps_tol() -> f64 {
    0.05
}

fn default_l_grid() -> Vec<f64> {
    (0..7).map(|k| f64::from(1u32 << k)).collect()
}

fn default_r_ladder() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025, 0.0125]
}

fn default_tau_fractions() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

impl LadderConfig {
    pub fn new(solve: SolveConfig) -> Self {
        Self {
            solve,
            eps_tol: default_eps_tol(),
            l_grid: default_l_grid(),
            r_ladder: default_r_ladder(),
            tau_fractions: default_tau_fractions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub from_eps: f64,
    pub to_eps: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsRow {
    pub from_eps: f64,
    pub to_eps: f64,
    pub statistic: f64,
    /// Two-sample critical value at level 0.05.
    pub critical: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftGapRow {
    pub from_eps: f64,
    pub to_eps: f64,
    pub probability: f64,
    pub ci: f64,
}

/// Tail and displacement probabilities for one set of paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AldousTable {
    /// `(l, P(sup_{s≤t}|X_s| > l))`.
    pub tail: Vec<(f64, f64)>,
    /// `(r, P(max_τ |X_{t∧(τ+r)} − X_{t∧τ}| > ε_tol))`.
    pub displacement: Vec<(f64, f64)>,
}

impl AldousTable {
    /// Nonincreasing in `l`, exactly.
    pub fn tail_is_monotone(&self) -> bool {
        self.tail.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    /// Some level `l` has tail probability below `p`.
    pub fn tail_falls_below(&self, p: f64) -> bool {
        self.tail.iter().any(|&(_, q)| q < p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<f64>,
    pub pathwise_gap: Vec<GapRow>,
    pub ks_distances: Vec<KsRow>,
    pub drift_integral_gap: Vec<DriftGapRow>,
    /// One table per rung.
    pub aldous_table: Vec<AldousTable>,
    pub n_paths: usize,
    /// Echoed in the CSV header comment.
    pub params: Vec<(String, String)>,
}

impl ConvergenceReport {
    /// Median sup-gap of the first rung pair over that of the last.
    pub fn median_gap_reduction(&self) -> f64 {
        let first = self.pathwise_gap.first().map_or(f64::NAN, |g| g.median);
        let last = self.pathwise_gap.last().map_or(f64::NAN, |g| g.median);
        first / last
    }

    /// `D_{k+1} ≤ D_k + critical` along the ladder.
    pub fn ks_nonincreasing_within_ci(&self) -> bool {
        self.ks_distances
            .windows(2)
            .all(|w| w[1].statistic <= w[0].statistic + w[1].critical)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(w, "# params {}", params.join(" "))?;
        writeln!(w, "LADDER")?;
        writeln!(w, "from_eps,to_eps,gap_median,gap_q90,gap_max")?;
        for g in &self.pathwise_gap {
            writeln!(w, "{},{},{},{},{}", g.from_eps, g.to_eps, g.median, g.q90, g.max)?;
        }
        writeln!(w, "KS")?;
        writeln!(w, "from_eps,to_eps,ks,ks_critical")?;
        for k in &self.ks_distances {
            writeln!(w, "{},{},{},{}", k.from_eps, k.to_eps, k.statistic, k.critical)?;
        }
        writeln!(w, "ALDOUS")?;
        writeln!(w, "eps,kind,level,probability")?;
        for (eps, table) in self.ladder.iter().zip(&self.aldous_table) {
            for (l, p) in &table.tail {
                writeln!(w, "{eps},tail,{l},{p}")?;
            }
            for (r, p) in &table.displacement {
                writeln!(w, "{eps},displacement,{r},{p}")?;
            }
        }
        writeln!(w, "DRIFT_GAP")?;
        writeln!(w, "from_eps,to_eps,probability,ci")?;
        for d in &self.drift_integral_gap {
            writeln!(w, "{},{},{},{}", d.from_eps, d.to_eps, d.probability, d.ci)?;
        }
        Ok(())
    }
}

/// Index of the grid point whose step covers `s`.
fn step_index(t_grid: &[f64], s: f64) -> usize {
    t_grid.partition_point(|&u| u <= s).saturating_sub(1)
}

struct PathSummary {
    sup_abs: f64,
    displacement: Vec<f64>,
}

fn summarize(t_grid: &[f64], values: &[f64], t: f64, r_ladder: &[f64], taus: &[f64]) -> PathSummary {
    let end = step_index(t_grid, t);
    let sup_abs = values[..=end].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let displacement = r_ladder
        .iter()
        .map(|&r| {
            taus.iter()
                .map(|&tau| {
                    let a = values[step_index(t_grid, tau.min(t))];
                    let b = values[step_index(t_grid, (tau + r).min(t))];
                    (b - a).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    PathSummary { sup_abs, displacement }
}

fn tabulate(summaries: &[&PathSummary], l_grid: &[f64], r_ladder: &[f64], eps_tol: f64) -> AldousTable {
    let tail = l_grid
        .iter()
        .map(|&l| (l, stats::frequency(summaries, |s| s.sup_abs > l)))
        .collect();
    let displacement = r_ladder
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, stats::frequency(summaries, |s| s.displacement[i] > eps_tol)))
        .collect();
    AldousTable { tail, displacement }
}

/// Tail and displacement table for paths on a common grid, at time `t`.
/// Displacements start at `τ ∈ taus` and look `r` ahead, both cut at `t`.
pub fn aldous_diagnostics(
    paths: &[SamplePath],
    t: f64,
    l_grid: &[f64],
    r_ladder: &[f64],
    taus: &[f64],
    eps_tol: f64,
) -> Result<AldousTable> {
    let Some(first) = paths.first() else {
        return Err(Error::InvalidParameter("no paths".into()));
    };
    if paths.iter().any(|p| p.t_grid != first.t_grid) {
        return Err(Error::InvalidParameter("paths must share a common grid".into()));
    }
    let summaries: Vec<PathSummary> = paths
        .iter()
        .map(|p| summarize(&p.t_grid, &p.values, t, r_ladder, taus))
        .collect();
    let refs: Vec<&PathSummary> = summaries.iter().collect();
    Ok(tabulate(&refs, l_grid, r_ladder, eps_tol))
}

struct SeedResult {
    gaps: Vec<f64>,
    terminals: Vec<f64>,
    drift_integrals: Vec<f64>,
    summaries: Vec<PathSummary>,
}

/// Solves with `a` mollified at every width in `ladder` under shared noise.
pub fn mollification_ladder(model: &LevyModel, a: &DriftSpec, ladder: &[f64], cfg: &LadderConfig) -> Result<ConvergenceReport> {
    cfg.solve.validate()?;
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter("ladder needs at least three widths".into()));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) || !(ladder[ladder.len() - 1] > 0.0) {
        return Err(Error::InvalidParameter("ladder must be positive and strictly decreasing".into()));
    }
    let drifts: Vec<DriftSpec> = ladder.iter().map(|&e| mollify(a, e)).collect::<Result<_>>()?;
    let sampler = LevySampler::new(model, &SamplerOptions::default())?;
    let grid = cfg.solve.time_grid();
    let t = cfg.solve.t_end;
    let taus: Vec<f64> = cfg.tau_fractions.iter().map(|f| f * t).collect();
    let x0 = cfg.solve.x0;

    let per_seed: Vec<SeedResult> = (0..cfg.solve.n_paths)
        .into_par_iter()
        .map(|j| {
            let inc = sampler.increments(&grid, &mut cfg.solve.stream(j).rng());
            let mut prev: Option<Vec<f64>> = None;
            let mut out = SeedResult {
                gaps: Vec::with_capacity(ladder.len() - 1),
                terminals: Vec::with_capacity(ladder.len()),
                drift_integrals: Vec::with_capacity(ladder.len()),
                summaries: Vec::with_capacity(ladder.len()),
            };
            for d in &drifts {
                let (xs, ys) = euler_states(d, 0.0, x0, &grid, &inc);
                if let Some(p) = &prev {
                    let gap = p.iter().zip(&xs).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()));
                    out.gaps.push(gap);
                }
                out.terminals.push(*xs.last().expect("nonempty"));
                out.drift_integrals.push(*ys.last().expect("nonempty"));
                out.summaries.push(summarize(&grid, &xs, t, &cfg.r_ladder, &taus));
                prev = Some(xs);
            }
            out
        })
        .collect();

    let n = per_seed.len();
    let mut pathwise_gap = Vec::new();
    let mut ks_distances = Vec::new();
    let mut drift_integral_gap = Vec::new();
    for k in 0..ladder.len() - 1 {
        let (from_eps, to_eps) = (ladder[k], ladder[k + 1]);
        let mut gaps: Vec<f64> = per_seed.iter().map(|s| s.gaps[k]).collect();
        gaps.sort_by(f64::total_cmp);
        pathwise_gap.push(GapRow {
            from_eps,
            to_eps,
            median: stats::quantile_sorted(&gaps, 0.5),
            q90: stats::quantile_sorted(&gaps, 0.9),
            max: *gaps.last().expect("nonempty"),
        });
        let a: Vec<f64> = per_seed.iter().map(|s| s.terminals[k]).collect();
        let b: Vec<f64> = per_seed.iter().map(|s| s.terminals[k + 1]).collect();
        ks_distances.push(KsRow {
            from_eps,
            to_eps,
            statistic: stats::ks_statistic(&a, &b),
            critical: stats::ks_critical(n, n, 0.05),
        });
        let exceed: Vec<f64> = per_seed
            .iter()
            .map(|s| {
                if (s.drift_integrals[k] - s.drift_integrals[k + 1]).abs() > cfg.eps_tol {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        drift_integral_gap.push(DriftGapRow {
            from_eps,
            to_eps,
            probability: stats::mean(&exceed),
            ci: stats::ci95_halfwidth(&exceed),
        });
    }
    let aldous_table = (0..ladder.len())
        .map(|k| {
            let refs: Vec<&PathSummary> = per_seed.iter().map(|s| &s.summaries[k]).collect();
            tabulate(&refs, &cfg.l_grid, &cfg.r_ladder, cfg.eps_tol)
        })
        .collect();

    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
    let params = vec![
        ("ladder".to_string(), join(ladder)),
        ("n_paths".to_string(), n.to_string()),
        ("seed".to_string(), cfg.solve.seed.to_string()),
        ("x0".to_string(), x0.to_string()),
        ("t_end".to_string(), t.to_string()),
        ("dt".to_string(), cfg.solve.dt.to_string()),
        ("eps_tol".to_string(), cfg.eps_tol.to_string()),
        ("drift_bound".to_string(), a.bound().to_string()),
    ];
    Ok(ConvergenceReport {
        ladder: ladder.to_vec(),
        pathwise_gap,
        ks_distances,
        drift_integral_gap,
        aldous_table,
        n_paths: n,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::PathKind;

    fn solve(n_paths: usize) -> SolveConfig {
        SolveConfig {
            x0: 0.0,
            t_end: 1.0,
            dt: 1e-2,
            n_paths,
            seed: 5,
        }
    }

    #[test]
    fn constant_drift_has_zero_gaps() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let a = DriftSpec::constant(0.4).unwrap();
        let r = mollification_ladder(&m, &a, &[0.5, 0.25, 0.125], &LadderConfig::new(solve(200))).unwrap();
        for g in &r.pathwise_gap {
            assert_eq!(g.max, 0.0);
        }
        for d in &r.drift_integral_gap {
            assert_eq!(d.probability, 0.0);
        }
        for k in &r.ks_distances {
            assert_eq!(k.statistic, 0.0);
        }
    }

    #[test]
    fn rejects_bad_ladders() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let a = DriftSpec::sign(1.0).unwrap();
        let cfg = LadderConfig::new(solve(10));
        assert!(mollification_ladder(&m, &a, &[0.5, 0.25], &cfg).is_err());
        assert!(mollification_ladder(&m, &a, &[0.5, 0.5, 0.25], &cfg).is_err());
        assert!(mollification_ladder(&m, &a, &[0.5, 0.25, 0.0], &cfg).is_err());
    }

    #[test]
    fn aldous_table_on_deterministic_paths() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        // X_t = 3t and X_t = −t
        let p1 = SamplePath::new(grid.clone(), grid.iter().map(|t| 3.0 * t).collect(), PathKind::Solution).unwrap();
        let p2 = SamplePath::new(grid.clone(), grid.iter().map(|t| -t).collect(), PathKind::Solution).unwrap();
        let table = aldous_diagnostics(&[p1, p2], 1.0, &[0.5, 2.0, 4.0], &[0.2, 0.1], &[0.0, 0.5], 0.25).unwrap();
        assert_eq!(table.tail, vec![(0.5, 1.0), (2.0, 0.5), (4.0, 0.0)]);
        // displacement 3r beyond 0.25 only for the fast path
        assert_eq!(table.displacement, vec![(0.2, 0.5), (0.1, 0.5)]);
        assert!(table.tail_is_monotone());
        assert!(table.tail_falls_below(0.05));
    }

    #[test]
    fn ladder_is_reproducible_and_csv_has_blocks() {
        let m = LevyModel::symmetric_stable(1.5, 1.0).unwrap();
        let a = DriftSpec::sign(1.0).unwrap();
        let cfg = LadderConfig::new(solve(100));
        let r1 = mollification_ladder(&m, &a, &[0.5, 0.25, 0.125], &cfg).unwrap();
        let r2 = mollification_ladder(&m, &a, &[0.5, 0.25, 0.125], &cfg).unwrap();
        assert_eq!(r1, r2);
        let mut buf = Vec::new();
        r1.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for block in ["# params", "LADDER", "KS", "ALDOUS", "DRIFT_GAP"] {
            assert!(text.contains(block));
        }
        for table in &r1.aldous_table {
            assert!(table.tail_is_monotone());
        }
    }
}
