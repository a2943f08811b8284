//! Bounded drifts `a(t, x)`, their bump-kernel mollifications, and the
//! nonnegative test functions `f(t, x)` used by the occupation estimates.
//!
//! Mollification convolves with `q_ε(t, x) = ε^{−2} q₁(t/ε) q₁(x/ε)` where
//! `q₁(u) ∝ exp(−1/(1 − u²))` on `(−1, 1)`. Drifts that are constant on
//! rectangular cells (sign, checkerboard, table) are convolved exactly cell
//! by cell through the kernel's distribution function, so the result is
//! smooth even though the base jumps. Other drifts use a fixed 32-point
//! Gauss–Legendre rule per axis.

use std::fmt;
use std::io::BufRead;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, GaussLegendre};

const KERNEL_TABLE: usize = 4096;
const MOLLIFIER_ORDER: usize = 32;

/// The one-dimensional bump `q₁`, normalised to unit mass, with a tabulated
/// distribution function.
pub struct MollifierKernel {
    norm: f64,
    /// `S(u) = ∫_0^u q₁` at `u_k = k/KERNEL_TABLE`; `Q(u) = ½ + S(u)`.
    half_cdf: Vec<f64>,
    rule_nodes: Vec<f64>,
    rule_weights: Vec<f64>,
}

impl fmt::Debug for MollifierKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MollifierKernel").field("norm", &self.norm).finish()
    }
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl MollifierKernel {
    /// Shared instance; the table is built once.
    pub fn get() -> &'static MollifierKernel {
        static KERNEL: OnceLock<MollifierKernel> = OnceLock::new();
        KERNEL.get_or_init(Self::build)
    }

    fn build() -> Self {
        let cell = GaussLegendre::new(16);
        let h = 1.0 / KERNEL_TABLE as f64;
        let mut half_cdf = Vec::with_capacity(KERNEL_TABLE + 1);
        let mut acc = 0.0;
        half_cdf.push(0.0);
        for k in 0..KERNEL_TABLE {
            let a = k as f64 * h;
            acc += cell.integrate(a, a + h, raw_bump);
            half_cdf.push(acc);
        }
        let norm = 2.0 * acc;
        for v in &mut half_cdf {
            *v /= norm;
        }
        let rule = GaussLegendre::new(MOLLIFIER_ORDER);
        let mut rule_weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| w * raw_bump(u))
            .collect();
        let total: f64 = rule_weights.iter().sum();
        for w in &mut rule_weights {
            *w /= total;
        }
        Self {
            norm,
            half_cdf,
            rule_nodes: rule.nodes,
            rule_weights,
        }
    }

    /// Normalised density `q₁(u)`.
    pub fn density(&self, u: f64) -> f64 {
        raw_bump(u) / self.norm
    }

    /// `Q(u) = ∫_{−1}^u q₁`, odd-symmetric about `Q(0) = ½`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let s = self.half_cdf_at(u.abs());
        if u >= 0.0 {
            0.5 + s
        } else {
            0.5 - s
        }
    }

    // cubic Hermite on the table, using q₁ as the exact derivative
    fn half_cdf_at(&self, u: f64) -> f64 {
        let pos = u * KERNEL_TABLE as f64;
        let k = (pos.floor() as usize).min(KERNEL_TABLE - 1);
        let h = 1.0 / KERNEL_TABLE as f64;
        let s = pos - k as f64;
        let (y0, y1) = (self.half_cdf[k], self.half_cdf[k + 1]);
        let (d0, d1) = (self.density(k as f64 * h) * h, self.density((k + 1) as f64 * h) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * d1
    }

    /// Kernel mass of `{y : lo < y ≤ hi}`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.cdf(hi) - self.cdf(lo)
    }

    /// `C_q = ∫|q₁'| · ∫q₁ = 2 q₁(0)`, since `q₁` is unimodal with unit mass.
    pub fn lipschitz_factor(&self) -> f64 {
        2.0 * self.density(0.0)
    }

    /// Nodes and normalised weights of the fixed product rule.
    pub fn rule(&self) -> (&[f64], &[f64]) {
        (&self.rule_nodes, &self.rule_weights)
    }
}

/// Drift on a nearest-cell table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDrift {
    pub t_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    /// t-major values.
    pub values: Vec<f64>,
}

impl TableDrift {
    pub fn new(t_nodes: Vec<f64>, x_nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t_nodes.is_empty() || x_nodes.is_empty() || values.len() != t_nodes.len() * x_nodes.len() {
            return Err(Error::InvalidParameter("table drift needs a full tensor grid of values".into()));
        }
        for nodes in [&t_nodes, &x_nodes] {
            if nodes.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter("table nodes must be strictly increasing".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("table values must be finite".into()));
        }
        Ok(Self {
            t_nodes,
            x_nodes,
            values,
        })
    }

    /// Reads `t,x,value` rows (optional header). Every `(t, x)` pair of the
    /// tensor grid must appear exactly once.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                _ if lineno == 0 => continue,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "line {}: expected three numeric fields t,x,value",
                        lineno + 1
                    )))
                }
            }
        }
        let mut ts: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut xs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if rows.len() != ts.len() * xs.len() {
            return Err(Error::InvalidParameter(format!(
                "table has {} rows but {}x{} distinct nodes",
                rows.len(),
                ts.len(),
                xs.len()
            )));
        }
        let mut values = vec![f64::NAN; rows.len()];
        for (t, x, v) in rows {
            let i = ts.partition_point(|&s| s < t);
            let j = xs.partition_point(|&s| s < x);
            values[i * xs.len() + j] = v;
        }
        Self::new(ts, xs, values)
    }

    fn bound(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn eval(&self, t: f64, x: f64) -> f64 {
        let i = nearest(&self.t_nodes, t);
        let j = nearest(&self.x_nodes, x);
        self.values[i * self.x_nodes.len() + j]
    }
}

fn nearest(nodes: &[f64], s: f64) -> usize {
    let k = nodes.partition_point(|&n| n < s);
    if k == 0 {
        0
    } else if k == nodes.len() {
        k - 1
    } else if s - nodes[k - 1] <= nodes[k] - s {
        k - 1
    } else {
        k
    }
}

/// Cell boundaries `(lo, hi]` of nearest-node cells.
fn cell_bounds(nodes: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 {
        f64::NEG_INFINITY
    } else {
        0.5 * (nodes[k - 1] + nodes[k])
    };
    let hi = if k + 1 == nodes.len() {
        f64::INFINITY
    } else {
        0.5 * (nodes[k] + nodes[k + 1])
    };
    (lo, hi)
}

type DriftFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DriftFamily {
    Constant(f64),
    /// `k·sign(x)`, with `sign(0) = 0`.
    SignX { k: f64 },
    /// `k·(−1)^{⌊t/p_t⌋ + ⌊x/p_x⌋}`.
    Checkerboard { k: f64, period_t: f64, period_x: f64 },
    Table(TableDrift),
    /// User drift, clipped to `[−K, K]`.
    Custom { label: String, f: DriftFn, time_dependent: bool },
    Mollified { base: Box<DriftSpec>, eps: f64 },
}

impl fmt::Debug for DriftFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftFamily::Constant(v) => write!(f, "Constant({v})"),
            DriftFamily::SignX { k } => write!(f, "SignX {{ k: {k} }}"),
            DriftFamily::Checkerboard { k, period_t, period_x } => {
                write!(f, "Checkerboard {{ k: {k}, period_t: {period_t}, period_x: {period_x} }}")
            }
            DriftFamily::Table(t) => write!(f, "Table({}x{})", t.t_nodes.len(), t.x_nodes.len()),
            DriftFamily::Custom { label, .. } => write!(f, "Custom({label})"),
            DriftFamily::Mollified { base, eps } => write!(f, "Mollified({:?}, eps={eps})", base.family),
        }
    }
}

/// A drift with a certified bound `|a| ≤ K` and, for mollified drifts, a
/// Lipschitz constant in `x`.
#[derive(Debug, Clone)]
pub struct DriftSpec {
    family: DriftFamily,
    bound: f64,
    lipschitz: Option<f64>,
}

impl DriftSpec {
    pub fn constant(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("constant drift must be finite, got {v}")));
        }
        Ok(Self {
            family: DriftFamily::Constant(v),
            bound: v.abs(),
            lipschitz: Some(0.0),
        })
    }

    pub fn zero() -> Self {
        Self::constant(0.0).expect("zero is finite")
    }

    pub fn sign(k: f64) -> Result<Self> {
        check_bound(k)?;
        Ok(Self {
            family: DriftFamily::SignX { k },
            bound: k,
            lipschitz: None,
        })
    }

    pub fn checkerboard(k: f64, period_t: f64, period_x: f64) -> Result<Self> {
        check_bound(k)?;
        if !(period_t > 0.0 && period_x > 0.0) {
            return Err(Error::InvalidParameter("checkerboard periods must be positive".into()));
        }
        Ok(Self {
            family: DriftFamily::Checkerboard { k, period_t, period_x },
            bound: k,
            lipschitz: None,
        })
    }

    pub fn table(table: TableDrift) -> Self {
        let bound = table.bound();
        Self {
            family: DriftFamily::Table(table),
            bound,
            lipschitz: None,
        }
    }

    /// Arbitrary drift; evaluations are clipped to `[−k, k]` so the bound
    /// holds by construction.
    pub fn custom<F>(label: impl Into<String>, k: f64, time_dependent: bool, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        check_bound(k)?;
        Ok(Self {
            family: DriftFamily::Custom {
                label: label.into(),
                f: Arc::new(f),
                time_dependent,
            },
            bound: k,
            lipschitz: None,
        })
    }

    pub fn family(&self) -> &DriftFamily {
        &self.family
    }

    /// The certified bound `K`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn lipschitz_cert(&self) -> Option<f64> {
        self.lipschitz
    }

    fn is_time_dependent(&self) -> bool {
        match &self.family {
            DriftFamily::Constant(_) | DriftFamily::SignX { .. } => false,
            DriftFamily::Checkerboard { .. } => true,
            DriftFamily::Table(t) => t.t_nodes.len() > 1,
            DriftFamily::Custom { time_dependent, .. } => *time_dependent,
            DriftFamily::Mollified { base, .. } => base.is_time_dependent(),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match &self.family {
            DriftFamily::Constant(v) => *v,
            DriftFamily::SignX { k } => {
                if x > 0.0 {
                    *k
                } else if x < 0.0 {
                    -k
                } else {
                    0.0
                }
            }
            DriftFamily::Checkerboard { k, period_t, period_x } => {
                let parity = (t / period_t).floor() + (x / period_x).floor();
                if parity.rem_euclid(2.0) == 0.0 {
                    *k
                } else {
                    -k
                }
            }
            DriftFamily::Table(table) => table.eval(t, x),
            DriftFamily::Custom { f, .. } => f(t, x).clamp(-self.bound, self.bound),
            DriftFamily::Mollified { base, eps } => mollified_eval(base, *eps, t, x),
        }
    }
}

fn check_bound(k: f64) -> Result<()> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("drift bound must be finite and >= 0, got {k}")));
    }
    Ok(())
}

/// Kernel mass of `{y : s − εy ∈ (lo, hi]}`.
fn cell_weight(kernel: &MollifierKernel, s: f64, eps: f64, lo: f64, hi: f64) -> f64 {
    kernel.mass_between((s - hi) / eps, (s - lo) / eps)
}

/// `∫ (−1)^{⌊(s − εy)/p⌋} q₁(y) dy`.
fn alternating_weight(kernel: &MollifierKernel, s: f64, eps: f64, p: f64) -> f64 {
    let first = ((s - eps) / p).floor() as i64;
    let last = ((s + eps) / p).floor() as i64;
    let mut acc = 0.0;
    for j in first..=last {
        let w = cell_weight(kernel, s, eps, j as f64 * p, (j + 1) as f64 * p);
        acc += if j.rem_euclid(2) == 0 { w } else { -w };
    }
    acc
}

fn table_weights(kernel: &MollifierKernel, nodes: &[f64], s: f64, eps: f64) -> Vec<(usize, f64)> {
    let lo_k = nearest(nodes, s - eps);
    let hi_k = nearest(nodes, s + eps);
    (lo_k..=hi_k)
        .map(|k| {
            let (lo, hi) = cell_bounds(nodes, k);
            (k, cell_weight(kernel, s, eps, lo, hi))
        })
        .filter(|&(_, w)| w != 0.0)
        .collect()
}

fn mollified_eval(base: &DriftSpec, eps: f64, t: f64, x: f64) -> f64 {
    let kernel = MollifierKernel::get();
    match &base.family {
        DriftFamily::Constant(v) => *v,
        DriftFamily::SignX { k } => k * (2.0 * kernel.cdf(x / eps) - 1.0),
        DriftFamily::Checkerboard { k, period_t, period_x } => {
            k * alternating_weight(kernel, t, eps, *period_t) * alternating_weight(kernel, x, eps, *period_x)
        }
        DriftFamily::Table(table) => {
            let wt = table_weights(kernel, &table.t_nodes, t, eps);
            let wx = table_weights(kernel, &table.x_nodes, x, eps);
            let nx = table.x_nodes.len();
            let mut acc = 0.0;
            for &(i, a) in &wt {
                for &(j, b) in &wx {
                    acc += a * b * table.values[i * nx + j];
                }
            }
            acc
        }
        DriftFamily::Custom { .. } | DriftFamily::Mollified { .. } => {
            let (nodes, weights) = kernel.rule();
            if base.is_time_dependent() {
                let mut acc = 0.0;
                for (s, ws) in nodes.iter().zip(weights) {
                    let mut inner = 0.0;
                    for (y, wy) in nodes.iter().zip(weights) {
                        inner += wy * base.eval(t - eps * s, x - eps * y);
                    }
                    acc += ws * inner;
                }
                acc
            } else {
                nodes
                    .iter()
                    .zip(weights)
                    .map(|(y, wy)| wy * base.eval(t, x - eps * y))
                    .sum()
            }
        }
    }
}

/// ε-convolution of `a` with the bump kernel. The result keeps the bound
/// `K` and carries the Lipschitz certificate `K·C_q/ε`.
pub fn mollify(a: &DriftSpec, eps: f64) -> Result<DriftSpec> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("mollification width must be > 0, got {eps}")));
    }
    let k = a.bound;
    Ok(DriftSpec {
        family: DriftFamily::Mollified {
            base: Box::new(a.clone()),
            eps,
        },
        bound: k,
        lipschitz: Some(k * MollifierKernel::get().lipschitz_factor() / eps),
    })
}

/// Points at which [`lipschitz_probe`] compares neighbouring values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub t_points: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_len: usize,
}

/// Largest divided difference `|a(t,x_{j+1}) − a(t,x_j)| / Δx` on the grid.
pub fn lipschitz_probe(a: &DriftSpec, grid: &ProbeGrid) -> f64 {
    let n = grid.x_len.max(2);
    let h = (grid.x_max - grid.x_min) / (n - 1) as f64;
    let mut worst: f64 = 0.0;
    for &t in &grid.t_points {
        let mut prev = a.eval(t, grid.x_min);
        for j in 1..n {
            let x = grid.x_min + h * j as f64;
            let v = a.eval(t, x);
            worst = worst.max((v - prev).abs() / h);
            prev = v;
        }
    }
    worst
}

/// Closed rectangle `[t0, t1] × [x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl SupportBox {
    pub fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Result<Self> {
        if !(t1 > t0) || !(x1 > x0) || ![t0, t1, x0, x1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support box must be finite and nondegenerate, got [{t0}, {t1}]x[{x0}, {x1}]"
            )));
        }
        Ok(Self { t0, t1, x0, x1 })
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        t >= self.t0 && t <= self.t1 && x >= self.x0 && x <= self.x1
    }

    pub fn area(&self) -> f64 {
        (self.t1 - self.t0) * (self.x1 - self.x0)
    }

    /// Intersection with another box; `None` when it has no area.
    pub fn intersect(&self, other: &SupportBox) -> Option<SupportBox> {
        let b = SupportBox {
            t0: self.t0.max(other.t0),
            t1: self.t1.min(other.t1),
            x0: self.x0.max(other.x0),
            x1: self.x1.min(other.x1),
        };
        (b.t1 > b.t0 && b.x1 > b.x0).then_some(b)
    }
}

type TestFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TestFamily {
    IndicatorBox { height: f64 },
    /// `h·exp(−((t−t_c)²/σ_t² + (x−x_c)²/σ_x²)/2)`, cut off outside the box.
    GaussianBump {
        height: f64,
        t_center: f64,
        x_center: f64,
        sigma_t: f64,
        sigma_x: f64,
    },
    Custom { label: String, f: TestFn, sup: f64 },
}

impl fmt::Debug for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFamily::IndicatorBox { height } => write!(f, "IndicatorBox {{ height: {height} }}"),
            TestFamily::GaussianBump {
                height,
                t_center,
                x_center,
                sigma_t,
                sigma_x,
            } => write!(
                f,
                "GaussianBump {{ height: {height}, center: ({t_center}, {x_center}), sigma: ({sigma_t}, {sigma_x}) }}"
            ),
            TestFamily::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// A nonnegative function vanishing outside a compact box.
#[derive(Debug, Clone)]
pub struct TestFunction {
    family: TestFamily,
    support: SupportBox,
}

impl TestFunction {
    pub fn indicator(support: SupportBox, height: f64) -> Result<Self> {
        if !(height >= 0.0) || !height.is_finite() {
            return Err(Error::InvalidParameter(format!("height must be >= 0, got {height}")));
        }
        Ok(Self {
            family: TestFamily::IndicatorBox { height },
            support,
        })
    }

    pub fn gaussian_bump(
        support: SupportBox,
        height: f64,
        center: (f64, f64),
        sigma: (f64, f64),
    ) -> Result<Self> {
        if !(height >= 0.0) || !(sigma.0 > 0.0 && sigma.1 > 0.0) {
            return Err(Error::InvalidParameter("bump needs height >= 0 and positive widths".into()));
        }
        Ok(Self {
            family: TestFamily::GaussianBump {
                height,
                t_center: center.0,
                x_center: center.1,
                sigma_t: sigma.0,
                sigma_x: sigma.1,
            },
            support,
        })
    }

    /// Custom `f`; negative values are clipped to 0 and `sup` must bound it.
    pub fn custom<F>(label: impl Into<String>, support: SupportBox, sup: f64, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            family: TestFamily::Custom {
                label: label.into(),
                f: Arc::new(f),
                sup,
            },
            support,
        }
    }

    pub fn support(&self) -> SupportBox {
        self.support
    }

    pub fn family(&self) -> &TestFamily {
        &self.family
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if !self.support.contains(t, x) {
            return 0.0;
        }
        match &self.family {
            TestFamily::IndicatorBox { height } => *height,
            TestFamily::GaussianBump {
                height,
                t_center,
                x_center,
                sigma_t,
                sigma_x,
            } => {
                let a = (t - t_center) / sigma_t;
                let b = (x - x_center) / sigma_x;
                height * (-0.5 * (a * a + b * b)).exp()
            }
            TestFamily::Custom { f, .. } => f(t, x).max(0.0),
        }
    }

    /// An upper bound for `sup f`.
    pub fn sup(&self) -> f64 {
        match &self.family {
            TestFamily::IndicatorBox { height } => *height,
            TestFamily::GaussianBump {
                height,
                t_center,
                x_center,
                ..
            } => {
                let t = t_center.clamp(self.support.t0, self.support.t1);
                let x = x_center.clamp(self.support.x0, self.support.x1);
                self.eval(t, x).max(if *height == 0.0 { 0.0 } else { f64::MIN_POSITIVE })
            }
            TestFamily::Custom { sup, .. } => *sup,
        }
    }

    /// `s·f` for `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be >= 0, got {s}")));
        }
        let family = match &self.family {
            TestFamily::IndicatorBox { height } => TestFamily::IndicatorBox { height: height * s },
            TestFamily::GaussianBump {
                height,
                t_center,
                x_center,
                sigma_t,
                sigma_x,
            } => TestFamily::GaussianBump {
                height: height * s,
                t_center: *t_center,
                x_center: *x_center,
                sigma_t: *sigma_t,
                sigma_x: *sigma_x,
            },
            TestFamily::Custom { label, f, sup } => {
                let f = f.clone();
                TestFamily::Custom {
                    label: format!("{s}*{label}"),
                    f: Arc::new(move |t, x| s * f(t, x)),
                    sup: sup * s,
                }
            }
        };
        Ok(Self {
            family,
            support: self.support,
        })
    }

    fn l2_on(&self, b: &SupportBox) -> f64 {
        match &self.family {
            TestFamily::IndicatorBox { height } => height * b.area().sqrt(),
            TestFamily::GaussianBump {
                height,
                t_center,
                x_center,
                sigma_t,
                sigma_x,
            } => {
                let it = gaussian_square_integral(b.t0, b.t1, *t_center, *sigma_t);
                let ix = gaussian_square_integral(b.x0, b.x1, *x_center, *sigma_x);
                height * (it * ix).sqrt()
            }
            TestFamily::Custom { .. } => {
                let rule = GaussLegendre::new(16);
                let panels = 32;
                let sq = rule.integrate_composite(b.t0, b.t1, panels, |t| {
                    rule.integrate_composite(b.x0, b.x1, panels, |x| {
                        let v = self.eval(t, x);
                        v * v
                    })
                });
                sq.sqrt()
            }
        }
    }
}

/// `∫_a^b exp(−(s−c)²/σ²) ds`.
fn gaussian_square_integral(a: f64, b: f64, c: f64, sigma: f64) -> f64 {
    let opts = AdaptiveOptions::default();
    integrate_adaptive(
        |s| {
            let z = (s - c) / sigma;
            (-z * z).exp()
        },
        a,
        b,
        opts,
    )
    .map(|r| r.value)
    .expect("smooth integrand converges")
}

/// `‖f‖₂` over the plane.
pub fn l2_norm(f: &TestFunction) -> f64 {
    f.l2_on(&f.support)
}

/// `‖f‖_{2,m,t}`: the L₂ norm restricted to `[0, t] × [−m, m]`.
pub fn l2_norm_local(f: &TestFunction, m: f64, t: f64) -> f64 {
    if !(m > 0.0 && t > 0.0) {
        return 0.0;
    }
    let window = SupportBox {
        t0: 0.0,
        t1: t,
        x0: -m,
        x1: m,
    };
    match f.support.intersect(&window) {
        Some(b) if b == f.support => l2_norm(f),
        Some(b) => f.l2_on(&b),
        None => 0.0,
    }
}

/// Serializable drift description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DriftConfig {
    Constant { value: f64 },
    SignX { k: f64 },
    Checkerboard { k: f64, period_t: f64, period_x: f64 },
    /// CSV file with `t,x,value` rows.
    Table { path: String },
    /// `k·sin(x)`.
    Sine { k: f64 },
    Mollified { base: Box<DriftConfig>, eps: f64 },
}

impl DriftConfig {
    pub fn build(&self) -> Result<DriftSpec> {
        match self {
            DriftConfig::Constant { value } => DriftSpec::constant(*value),
            DriftConfig::SignX { k } => DriftSpec::sign(*k),
            DriftConfig::Checkerboard { k, period_t, period_x } => DriftSpec::checkerboard(*k, *period_t, *period_x),
            DriftConfig::Table { path } => {
                let file = std::fs::File::open(path)?;
                Ok(DriftSpec::table(TableDrift::from_csv(std::io::BufReader::new(file))?))
            }
            DriftConfig::Sine { k } => {
                let k = *k;
                DriftSpec::custom(format!("{k}*sin(x)"), k.abs(), false, move |_, x| k * x.sin())
            }
            DriftConfig::Mollified { base, eps } => mollify(&base.build()?, *eps),
        }
    }
}

/// Serializable test-function description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunctionConfig {
    IndicatorBox {
        support: SupportBox,
        #[serde(default = "one")]
        height: f64,
    },
    GaussianBump {
        support: SupportBox,
        #[serde(default = "one")]
        height: f64,
        center: (f64, f64),
        sigma: (f64, f64),
    },
}

fn one() -> f64 {
    1.0
}

impl TestFunctionConfig {
    pub fn build(&self) -> Result<TestFunction> {
        match self {
            TestFunctionConfig::IndicatorBox { support, height } => {
                TestFunction::indicator(SupportBox::new(support.t0, support.t1, support.x0, support.x1)?, *height)
            }
            TestFunctionConfig::GaussianBump {
                support,
                height,
                center,
                sigma,
            } => TestFunction::gaussian_bump(
                SupportBox::new(support.t0, support.t1, support.x0, support.x1)?,
                *height,
                *center,
                *sigma,
            ),
        }
    }
}
