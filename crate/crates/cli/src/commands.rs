//! Subcommand drivers. Each writes its CSV artifacts into the output
//! directory and returns the rows of `SUMMARY.csv`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use levy_krylov::convergence::{mollification_ladder, LadderConfig};
use levy_krylov::drift::{l2_norm, DriftSpec, TestFunction};
use levy_krylov::krylov::{
    check_lambda, default_sweep_family, krylov_batch, krylov_local_batch, reference_constant, resolvent_oracle,
    write_reports_csv, KrylovConfig, KrylovQuery, KrylovReport, Outcome, ResolventGrid,
};
use levy_krylov::levy::{check_condition, lambda0, n1_constant, ConditionOptions, Lambda0Options, LevyModel, N1Options, Verdict};
use levy_krylov::sampler::{ecf_report, sample_path, RngStream};
use levy_krylov::sde::{euler_batch, write_batch_csv, SolveConfig};

use crate::config::{ConfigError, ExperimentConfig, LambdaPolicy};

#[derive(Debug)]
pub enum AppError {
    Config(ConfigError),
    Model(levy_krylov::Error),
    Io(std::io::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(e) => write!(f, "{e}"),
            AppError::Model(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<levy_krylov::Error> for AppError {
    fn from(e: levy_krylov::Error) -> Self {
        AppError::Model(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

type Result<T> = std::result::Result<T, AppError>;

/// One line of `SUMMARY.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment_id: String,
    pub verdict: String,
    pub metrics: Vec<(String, String)>,
}

impl SummaryRow {
    fn new(experiment_id: impl Into<String>, verdict: impl ToString) -> Self {
        Self {
            experiment_id: experiment_id.into(),
            verdict: verdict.to_string(),
            metrics: Vec::new(),
        }
    }

    fn metric(mut self, key: &str, value: impl ToString) -> Self {
        self.metrics.push((key.to_string(), value.to_string()));
        self
    }

    pub fn is_failure(&self) -> bool {
        self.verdict == "fail"
    }
}

pub fn write_summary(rows: &[SummaryRow], out: &Path) -> Result<()> {
    let mut w = create(out, "SUMMARY.csv")?;
    writeln!(w, "experiment_id,verdict,metrics")?;
    for r in rows {
        let metrics: Vec<String> = r.metrics.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(w, "{},{},{}", r.experiment_id, r.verdict, metrics.join(";"))?;
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

/// `λ` under the configured policy for a drift bound `k`.
fn resolve_lambda(model: &LevyModel, policy: LambdaPolicy, k: f64) -> Result<f64> {
    match policy {
        LambdaPolicy::AutoLambda0Or { floor } => Ok(lambda0(model, k, &Lambda0Options::default())?.max(floor)),
        LambdaPolicy::Fixed { value } => {
            check_lambda(model, k, value)?;
            Ok(value)
        }
    }
}

fn test_family(cfg: &ExperimentConfig) -> Result<Vec<(String, TestFunction)>> {
    let mut family = Vec::new();
    for named in &cfg.test_functions {
        family.push((named.id.clone(), named.f.build()?));
    }
    if cfg.krylov.builtin_sweep || family.is_empty() {
        family.extend(default_sweep_family());
    }
    Ok(family)
}

fn krylov_config(cfg: &ExperimentConfig, n_paths: usize) -> KrylovConfig {
    KrylovConfig {
        dt: cfg.solver.dt,
        n_paths,
        seed: cfg.seed,
        truncation_tol: cfg.krylov.truncation_tol,
    }
}

fn report_rows(cfg: &ExperimentConfig, prefix: &str, reports: &[KrylovReport]) -> Vec<SummaryRow> {
    reports
        .iter()
        .map(|r| {
            SummaryRow::new(format!("{}/{prefix}/{}", cfg.experiment_id, r.experiment_id), r.verdict)
                .metric("lhs", r.lhs_estimate)
                .metric("ci", r.lhs_ci_halfwidth)
                .metric("rhs_norm", r.rhs_norm)
                .metric("ratio", r.ratio)
        })
        .collect()
}

pub fn check_psi(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let model = cfg.model.build()?;
    cfg.condition.validate()?;
    let report = check_condition(&model, &cfg.condition, &ConditionOptions::default())?;
    let out = &cfg.output_dir;
    let mut w = create(out, "condition.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;

    let mut w = create(out, "psi.csv")?;
    writeln!(w, "xi,re_psi,im_psi")?;
    for xi in cfg.condition.points() {
        let p = model.psi(xi)?;
        writeln!(w, "{xi},{},{}", p.re, p.im)?;
    }
    w.flush()?;

    let mut row = SummaryRow::new(format!("{}/check-psi", cfg.experiment_id), report.verdict)
        .metric("trend_slope", report.trend_slope);
    if report.verdict == Verdict::Satisfied {
        let k = cfg.drift.build()?.bound();
        let l0 = lambda0(&model, k, &Lambda0Options::default())?;
        let lambda = resolve_lambda(&model, cfg.lambda, k)?;
        let n1 = n1_constant(&model, lambda, &N1Options::default())?;
        row = row
            .metric("K", k)
            .metric("lambda0", l0)
            .metric("lambda", lambda)
            .metric("N1", n1.value);
    }
    Ok(vec![row])
}

pub fn sample(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let model = cfg.model.build()?;
    let s = &cfg.sample;
    let ecf = ecf_report(&model, s.t, s.n_paths, &s.xi_grid, RngStream::new(cfg.seed, 1 << 40))?;
    let out = &cfg.output_dir;
    let mut w = create(out, "ecf.csv")?;
    ecf.write_csv(&mut w)?;
    w.flush()?;

    let solve = SolveConfig {
        x0: cfg.solver.x0,
        t_end: cfg.solver.t_end,
        dt: cfg.solver.dt,
        n_paths: s.n_written.max(1),
        seed: cfg.seed,
    };
    solve.validate()?;
    let grid = solve.time_grid();
    let mut w = create(out, "levy_paths.csv")?;
    writeln!(w, "path_id,t,value")?;
    for j in 0..solve.n_paths {
        let p = sample_path(&model, &grid, solve.stream(j))?;
        for (t, v) in p.t_grid.iter().zip(&p.values) {
            writeln!(w, "{j},{t},{v}")?;
        }
    }
    w.flush()?;

    let drift = cfg.drift.build()?;
    let paths = euler_batch(&model, &drift, &solve)?;
    let mut w = create(out, "paths.csv")?;
    write_batch_csv(&paths, &mut w)?;
    w.flush()?;

    Ok(vec![SummaryRow::new(format!("{}/sample", cfg.experiment_id), outcome(ecf.passes()))
        .metric("ecf_max_deviation", ecf.max_deviation)
        .metric("reference", ecf.reference)
        .metric("n_paths", ecf.n_paths)])
}

pub fn krylov(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let model = cfg.model.build()?;
    let drift = cfg.drift.build()?;
    let lambda = resolve_lambda(&model, cfg.lambda, drift.bound())?;
    let family = test_family(cfg)?;
    let kcfg = krylov_config(cfg, cfg.solver.n_paths);
    let queries: Vec<KrylovQuery> = family
        .iter()
        .map(|(id, f)| KrylovQuery::new(id.clone(), f.clone(), lambda).at(cfg.krylov.t0, cfg.krylov.x0))
        .collect();
    let reports = krylov_batch(&model, &drift, &queries, &kcfg)?;
    let out = &cfg.output_dir;
    let mut w = create(out, "krylov.csv")?;
    write_reports_csv(&reports, &mut w)?;
    w.flush()?;
    let mut rows = report_rows(cfg, "krylov", &reports);

    if let Some(local) = cfg.krylov.local {
        let reports = krylov_local_batch(&model, &drift, &family, local.m, local.t, cfg.solver.x0, lambda, &kcfg)?;
        let mut w = create(out, "krylov_local.csv")?;
        write_reports_csv(&reports, &mut w)?;
        w.flush()?;
        rows.extend(report_rows(cfg, "krylov_local", &reports));
    }
    Ok(rows)
}

pub fn resolvent(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let model = cfg.model.build()?;
    // the oracle is the driftless resolvent, so the threshold uses K = 0
    let lambda = resolve_lambda(&model, cfg.lambda, 0.0)?;
    let (fid, f) = match cfg.test_functions.first() {
        Some(named) => (named.id.clone(), named.f.build()?),
        None => default_sweep_family()
            .into_iter()
            .find(|(id, _)| id == "bump_wide")
            .expect("built-in bump"),
    };
    let r = &cfg.resolvent;
    let grid = r
        .grid
        .unwrap_or_else(|| ResolventGrid::around(f.support(), r.pad_t, r.pad_x, r.nt, r.nx));
    let field = resolvent_oracle(&model, &f, lambda, &grid)?;
    let out = &cfg.output_dir;
    let mut w = create(out, "resolvent.csv")?;
    field.write_csv(&mut w)?;
    w.flush()?;

    let bound = reference_constant(&model, lambda)? * l2_norm(&f);
    let sup = field.sup();
    let mut rows = vec![SummaryRow::new(format!("{}/resolvent/{fid}", cfg.experiment_id), outcome(sup <= bound))
        .metric("lambda", lambda)
        .metric("sup_v", sup)
        .metric("min_v", field.min())
        .metric("bound", bound)];

    if !r.probes.is_empty() {
        let oracle: Vec<f64> = r
            .probes
            .iter()
            .map(|&(t, x)| {
                field.value_at(t, x).ok_or_else(|| {
                    AppError::Model(levy_krylov::Error::Grid(format!("probe ({t}, {x}) lies off the resolvent grid")))
                })
            })
            .collect::<Result<_>>()?;
        let mc = if r.cross_check_paths > 0 {
            let queries: Vec<KrylovQuery> = r
                .probes
                .iter()
                .enumerate()
                .map(|(i, &(t, x))| KrylovQuery::new(format!("probe_{i}"), f.clone(), lambda).at(t, x))
                .collect();
            Some(krylov_batch(&model, &DriftSpec::zero(), &queries, &krylov_config(cfg, r.cross_check_paths))?)
        } else {
            None
        };
        let mut w = create(out, "probes.csv")?;
        writeln!(w, "t,x,oracle,mc,ci,rel_err,verdict")?;
        for (i, (&(t, x), v)) in r.probes.iter().zip(&oracle).enumerate() {
            match &mc {
                Some(reports) => {
                    let rep = &reports[i];
                    let rel = (rep.lhs_estimate - v).abs() / v.abs();
                    let verdict = outcome(rel <= r.rel_tol);
                    writeln!(w, "{t},{x},{v},{},{},{rel},{verdict}", rep.lhs_estimate, rep.lhs_ci_halfwidth)?;
                    rows.push(
                        SummaryRow::new(format!("{}/resolvent/probe_{i}", cfg.experiment_id), verdict)
                            .metric("oracle", v)
                            .metric("mc", rep.lhs_estimate)
                            .metric("rel_err", rel),
                    );
                }
                None => writeln!(w, "{t},{x},{v},,,,")?,
            }
        }
        w.flush()?;
    }
    Ok(rows)
}

pub fn converge(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    let model = cfg.model.build()?;
    let drift = cfg.drift.build()?;
    let l = &cfg.ladder;
    let mut lcfg = LadderConfig::new(SolveConfig {
        x0: cfg.solver.x0,
        t_end: cfg.solver.t_end,
        dt: cfg.solver.dt,
        n_paths: cfg.solver.n_paths,
        seed: cfg.seed,
    });
    lcfg.eps_tol = l.eps_tol;
    lcfg.l_grid = l.l_grid.clone();
    lcfg.r_ladder = l.r_ladder.clone();
    let mut report = mollification_ladder(&model, &drift, &l.eps, &lcfg)?;
    report.params.insert(0, ("experiment_id".into(), cfg.experiment_id.clone()));
    let mut w = create(&cfg.output_dir, "convergence.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;

    let reduction = report.median_gap_reduction();
    let ks_ok = report.ks_nonincreasing_within_ci();
    let monotone = report.aldous_table.iter().all(|t| t.tail_is_monotone());
    let bounded = report.aldous_table.iter().all(|t| t.tail_falls_below(l.tail_level));
    let gap_ok = reduction >= l.min_gap_reduction;
    let id = &cfg.experiment_id;
    Ok(vec![
        SummaryRow::new(format!("{id}/converge/gap"), outcome(gap_ok)).metric("median_gap_reduction", reduction),
        SummaryRow::new(format!("{id}/converge/ks"), outcome(ks_ok)).metric(
            "ks",
            report
                .ks_distances
                .iter()
                .map(|k| k.statistic.to_string())
                .collect::<Vec<_>>()
                .join("|"),
        ),
        SummaryRow::new(format!("{id}/converge/aldous"), outcome(monotone && bounded))
            .metric("monotone", monotone)
            .metric("bounded", bounded),
    ])
}
