//! Occupation-estimate, resolvent and mollification properties.

use levy_krylov::drift::{l2_norm, l2_norm_local, lipschitz_probe, mollify, DriftSpec, ProbeGrid, SupportBox, TestFunction};
use levy_krylov::fourier::GridFunction2;
use levy_krylov::krylov::{
    krylov_batch, reference_constant, resolvent_oracle, KrylovConfig, KrylovQuery, ResolventGrid,
};
use levy_krylov::levy::LevyModel;
use proptest::prelude::*;

fn stable() -> LevyModel {
    LevyModel::symmetric_stable(1.5, 1.0).unwrap()
}

fn boxed(t0: f64, t1: f64, x0: f64, x1: f64, h: f64) -> TestFunction {
    TestFunction::indicator(SupportBox::new(t0, t1, x0, x1).unwrap(), h).unwrap()
}

#[test]
fn pathwise_monotonicity_in_f_and_lambda() {
    let a = DriftSpec::sign(1.0).unwrap();
    let small = boxed(0.0, 1.0, -0.5, 0.5, 1.0);
    let large = boxed(0.0, 1.0, -1.0, 1.0, 1.0);
    let queries = vec![
        KrylovQuery::new("small", small.clone(), 2.0),
        KrylovQuery::new("large", large, 2.0),
        KrylovQuery::new("small_slow", small.clone(), 4.0),
    ];
    let mut cfg = KrylovConfig::new(500, 2);
    cfg.dt = 5e-3;
    let r = krylov_batch(&stable(), &a, &queries, &cfg).unwrap();
    assert!(r[0].lhs_estimate <= r[1].lhs_estimate);
    assert!(r[2].lhs_estimate <= r[0].lhs_estimate);
}

#[test]
fn scaling_leaves_the_ratio_unchanged() {
    let a = DriftSpec::sign(1.0).unwrap();
    let f = boxed(0.0, 0.5, 0.0, 0.5, 1.0);
    let queries = vec![
        KrylovQuery::new("f", f.clone(), 2.0),
        KrylovQuery::new("10f", f.scaled(10.0).unwrap(), 2.0),
    ];
    let mut cfg = KrylovConfig::new(400, 9);
    cfg.dt = 5e-3;
    let r = krylov_batch(&stable(), &a, &queries, &cfg).unwrap();
    assert!((r[1].ratio / r[0].ratio - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_is_linear_positive_and_bounded() {
    let m = stable();
    let lambda = 1.0;
    let b = SupportBox::new(0.0, 1.0, -0.5, 0.5).unwrap();
    let f1 = TestFunction::gaussian_bump(b, 1.0, (0.5, 0.0), (0.08, 0.08)).unwrap();
    let f2 = TestFunction::gaussian_bump(b, 2.0, (0.4, 0.1), (0.1, 0.2)).unwrap();
    let sum = TestFunction::custom("f1+f2", b, 3.0, {
        let (f1, f2) = (f1.clone(), f2.clone());
        move |t, x| f1.eval(t, x) + f2.eval(t, x)
    });
    let grid = ResolventGrid::around(b, 2.5, 3.0, 256, 256);
    let v1 = resolvent_oracle(&m, &f1, lambda, &grid).unwrap();
    let v2 = resolvent_oracle(&m, &f2, lambda, &grid).unwrap();
    let vs = resolvent_oracle(&m, &sum, lambda, &grid).unwrap();
    let scale = vs.sup();
    for ((a, b), c) in v1.grid.values.iter().zip(&v2.grid.values).zip(&vs.grid.values) {
        assert!((a + b - c).abs() < 1e-12 * scale);
    }
    assert!(v1.min() >= -1e-6 * v1.sup(), "min {} sup {}", v1.min(), v1.sup());
    let bound = reference_constant(&m, lambda).unwrap() * l2_norm(&f1);
    assert!(v1.sup() <= bound, "{} > {bound}", v1.sup());
}

#[test]
fn oracle_of_a_frozen_process_is_the_time_integral() {
    // S ≡ 0: v(t, x) = ∫₀^∞ e^{−λs} f(t+s, x) ds, computed here by quadrature
    let m = LevyModel::gaussian(0.0).unwrap();
    let b = SupportBox::new(0.0, 1.0, -0.5, 0.5).unwrap();
    let f = TestFunction::gaussian_bump(b, 1.0, (0.5, 0.0), (0.12, 0.12)).unwrap();
    let grid = ResolventGrid::around(b, 5.0, 2.5, 1024, 64);
    let v = resolvent_oracle(&m, &f, 2.0, &grid).unwrap();
    let g: &GridFunction2 = &v.grid;
    let rule = levy_krylov::quadrature::GaussLegendre::new(32);
    for t in [-0.3, 0.2, 0.45] {
        let (j, x) = g.x_grid.points().enumerate().find(|(_, x)| x.abs() < 0.1).unwrap();
        let i = ((t - g.t_grid.start) / g.t_grid.step).round() as usize;
        let tt = g.t_grid.point(i);
        let want = rule.integrate_composite(0.0, 2.0, 40, |s| (-2.0 * s).exp() * f.eval(tt + s, x));
        assert!((g.at(i, j) - want).abs() < 1e-6, "t={tt}: {} vs {want}", g.at(i, j));
    }
}

#[test]
fn oracle_refuses_tight_grids() {
    let b = SupportBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let f = boxed(0.0, 1.0, 0.0, 1.0, 1.0);
    let grid = ResolventGrid::around(b, 1.5, 2.5, 64, 64);
    assert!(resolvent_oracle(&stable(), &f, 1.0, &grid).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mollified_drift_respects_its_certificates(k in 0.1f64..3.0, eps in 0.05f64..1.0, pt in 0.1f64..2.0, px in 0.1f64..2.0) {
        for base in [DriftSpec::sign(k).unwrap(), DriftSpec::checkerboard(k, pt, px).unwrap()] {
            let m = mollify(&base, eps).unwrap();
            let grid = ProbeGrid { t_points: vec![0.0, 0.37, 1.2], x_min: -3.0, x_max: 3.0, x_len: 3001 };
            let probe = lipschitz_probe(&m, &grid);
            prop_assert!(probe <= m.lipschitz_cert().unwrap() * (1.0 + 1e-9));
            for x in [-2.0, -0.1, 0.0, 0.3, 1.7] {
                prop_assert!(m.eval(0.5, x).abs() <= k * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn local_norm_saturates_at_the_full_norm(t0 in 0.0f64..1.0, w in 0.1f64..2.0, x0 in -2.0f64..1.0, h in 0.1f64..3.0) {
        let f = boxed(t0, t0 + w, x0, x0 + 1.0, h);
        prop_assert_eq!(l2_norm_local(&f, 10.0, 10.0), l2_norm(&f));
        prop_assert!(l2_norm_local(&f, 0.5, t0 + 0.5 * w) <= l2_norm(&f));
    }
}
