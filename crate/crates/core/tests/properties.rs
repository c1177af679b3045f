//! Property tests over randomly sampled parameters.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use specgap::auxiliary::{jeq_residual, rho_k, solve_j, CurvatureProfile, Geometry, JSolution};
use specgap::bounds::{main_bound, shi_zhang, yang};
use specgap::eigen::{
    lambda1_model, neumann_eigenvalue_shooting, symmetric_interval_length, EigenQuery,
};
use specgap::matching::{match_maximum, m_min};
use specgap::model::{solve_ivp, Branch, ModelParams, SolveOptions};
use specgap::perturbation::{choose_k_bar, choose_n, verify_conditions, PerturbedParams};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn branch() -> impl Strategy<Value = Branch> {
    prop_oneof![
        Just(Branch::Tan),
        Just(Branch::Tanh),
        Just(Branch::Coth),
        Just(Branch::Zero)
    ]
}

fn params_for(branch: Branch, dim: f64, s: f64) -> ModelParams {
    let curv = match branch {
        Branch::Tan => s * s,
        Branch::Tanh | Branch::Coth => -s * s,
        Branch::Zero => 0.0,
    };
    ModelParams::new(dim, curv, branch).unwrap()
}

/// Interior point at fraction `x ∈ (0, 1)` of the domain, clipped to a
/// finite window for unbounded branches.
fn interior(p: &ModelParams, x: f64, window: f64) -> f64 {
    let dom = p.domain();
    let lo = dom.lo.max(-window);
    let hi = dom.hi.min(window);
    lo + x * (hi - lo)
}

/// First Neumann eigenvalue of a bump-defect circle from a dense eigensolver.
fn dense_principal(profile: &CurvatureProfile, v: &[f64]) -> f64 {
    let m = v.len();
    let h2 = profile.spacing().powi(2);
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = -2.0 / h2 + v[i];
        a[(i, (i + 1) % m)] += 1.0 / h2;
        a[(i, (i + m - 1) % m)] += 1.0 / h2;
    }
    a.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn bump(h: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| 2.0 - h * (-((t - 0.5) / width).powi(2)).exp()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn riccati_residual_vanishes(b in branch(), dim in 1.5f64..9.0, s in 0.2f64..3.0) {
        let p = params_for(b, dim, s);
        for i in 1..=1000 {
            let t = interior(&p, i as f64 / 1001.0, 20.0 / s);
            let tt = p.drift(t).unwrap();
            let dt = p.drift_derivative(t).unwrap();
            let scale = dt.abs() + tt * tt / (dim - 1.0) + (dim - 1.0) * s * s;
            let r = p.riccati_residual(t).unwrap();
            prop_assert!(r.abs() <= 1e-10 * scale.max(1.0), "t = {t}: residual {r}, scale {scale}");
        }
    }

    #[test]
    fn weight_log_derivative_is_minus_drift(b in branch(), dim in 1.5f64..9.0, s in 0.2f64..3.0, x in 0.05f64..0.95) {
        let p = params_for(b, dim, s);
        let t = interior(&p, x, 5.0 / s);
        let h = 1e-5 / s;
        let dlog = (p.weight(t + h).unwrap().ln() - p.weight(t - h).unwrap().ln()) / (2.0 * h);
        let tt = p.drift(t).unwrap();
        prop_assert!((dlog + tt).abs() <= 1e-6 * (1.0 + tt.abs()), "{dlog} vs {}", -tt);
    }

    #[test]
    fn zero_branch_is_a_cosine(dim in 1.0f64..6.0, lam in 0.05f64..20.0, a in -5.0f64..5.0) {
        let p = ModelParams::new(dim, 0.0, Branch::Zero).unwrap();
        let sol = solve_ivp(&p, lam, a, &SolveOptions::tight()).unwrap();
        let k = lam.sqrt();
        prop_assert!((sol.d - PI / k).abs() <= 1e-9 * sol.d);
        for i in 0..=400 {
            let t = (a + sol.d * i as f64 / 400.0).min(sol.b);
            let (w, _) = sol.eval(t).unwrap();
            prop_assert!((w + (k * (t - a)).cos()).abs() <= 1e-9);
        }
    }

    #[test]
    fn pole_start_has_one_sign_change(b in prop_oneof![Just(Branch::Tan), Just(Branch::Coth)], dim in 2.0f64..7.0, s in 0.5f64..2.0, x in 1.0f64..4.0) {
        let p = params_for(b, dim, s);
        let lam = match b {
            Branch::Tan => dim * s * s * x,
            _ => 0.25 * ((dim - 1.0) * s).powi(2) * (1.0 + x),
        };
        let pole = if b == Branch::Tan { p.domain().lo } else { 0.0 };
        let sol = solve_ivp(&p, lam, pole, &SolveOptions::default()).unwrap();
        prop_assert!(sol.is_finite());
        prop_assert!(sol.m > 0.0 && sol.m <= 1.0 + 1e-9, "m = {}", sol.m);
        let mut changes = 0;
        let mut prev = -1.0f64;
        for i in 1..2000 {
            let t = (sol.a + (sol.b - sol.a) * i as f64 / 2000.0).min(sol.b);
            let (w, _) = sol.eval(t).unwrap();
            if w.signum() != prev.signum() && w != 0.0 {
                changes += 1;
                prev = w;
            }
        }
        prop_assert_eq!(changes, 1);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn d_decreases_in_lambda(b in prop_oneof![Just(Branch::Tan), Just(Branch::Tanh), Just(Branch::Zero)], dim in 2.0f64..6.0, s in 0.3f64..2.0, x in 0.1f64..2.0) {
        let p = params_for(b, dim, s);
        let base = match b {
            Branch::Tan => dim * s * s,
            _ => 0.0,
        };
        let lam = base + x;
        let d1 = symmetric_interval_length(&p, lam).unwrap();
        let d2 = symmetric_interval_length(&p, lam * 1.05).unwrap();
        prop_assert!(d2 < d1, "{d1} then {d2}");
    }

    #[test]
    fn nested_intervals(b in branch(), dim in 2.0f64..6.0, s in 0.3f64..1.5, x in 0.1f64..0.8, len in 0.3f64..1.0, shrink in 0.1f64..0.9, shift in 0.0f64..1.0) {
        let p = params_for(b, dim, s);
        let dom = p.domain();
        let lo = dom.lo.max(-3.0);
        let hi = dom.hi.min(3.0);
        let width = (hi - lo) * len * 0.9;
        let a = lo + 0.05 * (hi - lo) + x * (hi - lo - width) * 0.9;
        let b_end = a + width;
        let inner = width * shrink;
        let a1 = a + shift * (width - inner);
        let outer = neumann_eigenvalue_shooting(&EigenQuery::new(p, a, b_end).unwrap()).unwrap();
        let nested = neumann_eigenvalue_shooting(&EigenQuery::new(p, a1, a1 + inner).unwrap()).unwrap();
        prop_assert!(nested >= outer * (1.0 - 1e-8), "{nested} < {outer}");
    }

    #[test]
    fn central_interval_is_smallest(b in branch(), dim in 2.0f64..6.0, s in 0.3f64..1.5, x in 0.05f64..0.9, len in 0.2f64..0.9) {
        let p = params_for(b, dim, s);
        let dom = p.domain();
        let lo = if dom.lo_singular { dom.lo } else { -3.0 };
        let hi = dom.hi.min(3.0);
        let width = (hi - lo) * len;
        let a = lo + x * (hi - lo - width);
        let lam = neumann_eigenvalue_shooting(&EigenQuery::new(p, a, a + width).unwrap()).unwrap();
        let sym = ModelParams::symmetric(dim, p.curv()).unwrap();
        let central = neumann_eigenvalue_shooting(&EigenQuery::symmetric(sym, width).unwrap()).unwrap();
        prop_assert!(lam >= central * (1.0 - 1e-8), "{lam} < {central}");
    }

    #[test]
    fn model_eigenvalue_monotone(n in 2.0f64..6.0, k in -2.0f64..1.0, d in 0.3f64..2.5) {
        let l = lambda1_model(n, k, d).unwrap();
        prop_assert!(lambda1_model(n, k, d * 1.05).unwrap() < l);
        prop_assert!(lambda1_model(n, k + 0.1, d).unwrap() >= l);
    }

    #[test]
    fn model_dominates_bounds(n in 3.0f64..7.0, k in -2.0f64..1.0, d in 0.3f64..3.0, alpha in 0.1f64..1.0) {
        let l = lambda1_model(n, k, d).unwrap();
        let slack = 1e-9 * l.max(1.0);
        prop_assert!(l >= shi_zhang(n, k, d).unwrap() - slack);
        if k < 0.0 {
            prop_assert!(l >= yang(n, k, d).unwrap() - slack);
        }
        prop_assert!(main_bound(n, k, d, alpha).unwrap() <= l + slack);
    }

    #[test]
    fn matching_reproduces_target(b in prop_oneof![Just(1.0f64), Just(-1.0f64)], dim in 2.5f64..5.0, x in 0.5f64..2.5, frac in 0.02f64..0.98) {
        let k = b * 0.5;
        let p = ModelParams::symmetric(dim, k).unwrap();
        let lam = if k > 0.0 { dim * k * (1.0 + x) } else { 0.25 * (dim - 1.0).powi(2) * 0.5 * (1.0 + x) };
        let floor = m_min(&p, lam).unwrap();
        let u = floor + frac * (1.0 - floor);
        let r = match_maximum(&p, lam, u).unwrap();
        prop_assert!((r.u_star_achieved - u).abs() < 1e-8, "{} vs {u}", r.u_star_achieved);
        // t ↦ w⁻¹(w(t)) is the identity with unit slope.
        let sol = &r.solution;
        let step = 1e-4 * (sol.b - sol.a);
        for i in 1..20 {
            let t = sol.a + (sol.b - sol.a) * i as f64 / 20.0;
            let f = |t: f64| sol.inverse(sol.eval(t).unwrap().0).unwrap();
            prop_assert!((f(t) - t).abs() <= 1e-8 * (sol.b - sol.a));
            let slope = (f(t + step) - f(t - step)) / (2.0 * step);
            prop_assert!((slope - 1.0).abs() <= 1e-5, "slope {slope}");
        }
    }

    #[test]
    fn matching_is_continuous(dim in 2.5f64..5.0, x in 0.5f64..2.0, frac in 0.1f64..0.9) {
        let p = ModelParams::symmetric(dim, 1.0).unwrap();
        let lam = dim * (1.0 + x);
        let floor = m_min(&p, lam).unwrap();
        let u = floor + frac * (1.0 - floor);
        let du = 1e-4 * (1.0 - floor);
        let a0 = match_maximum(&p, lam, u).unwrap().a;
        let a1 = match_maximum(&p, lam, u + du).unwrap().a;
        let a2 = match_maximum(&p, lam, u + 2.0 * du).unwrap().a;
        prop_assert!(a0 < a1 && a1 < a2);
        let (s1, s2) = (a1 - a0, a2 - a1);
        prop_assert!(s1 < 10.0 * s2 && s2 < 10.0 * s1, "steps {s1} {s2}");
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn perturbation_is_first_order(n in 3.0f64..8.0, k in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0], lam in 0.5f64..10.0, delta in 1e-4f64..1e-2) {
        let a = PerturbedParams::choose(n, delta, lam, k, 0.0, None).unwrap();
        let b = PerturbedParams::choose(n, delta / 10.0, lam, k, 0.0, None).unwrap();
        for (x, y) in [
            (a.big_n - n, b.big_n - n),
            ((a.k_bar - k).abs(), (b.k_bar - k).abs()),
            (a.lambda_bar - lam, b.lambda_bar - lam),
        ] {
            let ratio = x / y;
            prop_assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
        }
        for y in a.y_grid(1000) {
            prop_assert!(verify_conditions(&a, n, y).all_pass(), "y = {y}");
        }
    }

    #[test]
    fn chosen_n_is_minimal(n in 3.0f64..8.0, delta in 1e-3f64..0.2) {
        use specgap::perturbation::{choose_n_with_margin, n_condition};
        if let Ok(big_n) = choose_n(n, delta) {
            prop_assert!(n_condition(n, big_n, delta));
            prop_assert!(n_condition(n, choose_n_with_margin(n, delta, 1e-7).unwrap(), delta));
            prop_assert!(!n_condition(n, choose_n_with_margin(n, delta, -1e-6).unwrap(), delta));
            prop_assert!(choose_k_bar(1.0, n, big_n, delta, 0.0, None).unwrap() < 1.0);
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn auxiliary_sigma_and_gauge(h in 0.0f64..2.0, width in 0.03f64..0.2, tau in 1.2f64..4.0, scale in 1e-3f64..1e3) {
        let p = CurvatureProfile::from_fn(Geometry::Circle { length: 1.0 }, 128, 3, bump(h, width)).unwrap();
        let s = solve_j(&p, 1.0, tau).unwrap();
        prop_assert!(s.sigma_tilde >= 0.0);
        let scaled: Vec<f64> = s.w.iter().map(|w| w * scale).collect();
        let g = JSolution::from_eigenpair(&p, &scaled, s.sigma_tilde, tau).unwrap();
        prop_assert_eq!(g.sigma, s.sigma);
        for (x, y) in g.j.iter().zip(&s.j) {
            prop_assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn auxiliary_continuous_in_height(h in 0.05f64..2.0) {
        let prof = |h: f64| CurvatureProfile::from_fn(Geometry::Circle { length: 1.0 }, 128, 3, bump(h, 0.08)).unwrap();
        let a = solve_j(&prof(h), 1.0, 2.0).unwrap();
        let b = solve_j(&prof(h * (1.0 + 1e-6)), 1.0, 2.0).unwrap();
        prop_assert!((a.sigma - b.sigma).abs() <= 1e-4 * a.sigma);
        prop_assert!((a.sup_deviation - b.sup_deviation).abs() <= 1e-4 * a.sup_deviation);
    }

    #[test]
    fn principal_value_matches_dense_solver(h in 0.01f64..3.0, width in 0.03f64..0.2) {
        for m in [256, 512] {
            let p = CurvatureProfile::from_fn(Geometry::Circle { length: 1.0 }, m, 3, bump(h, width)).unwrap();
            let v: Vec<f64> = rho_k(&p, 1.0).iter().map(|r| 2.0 * r).collect();
            let s = solve_j(&p, 1.0, 2.0).unwrap();
            let dense = dense_principal(&p, &v);
            let tol = 1e-9 * (1.0 + dense.abs()) + 1e-10 / p.spacing().powi(2) * 1e-3;
            prop_assert!((s.sigma_tilde - dense).abs() <= tol, "M = {m}: {} vs {dense}", s.sigma_tilde);
        }
    }
}

#[test]
fn singular_start_error_is_second_order() {
    for p in [
        ModelParams::pole(3.0, 1.0).unwrap(),
        ModelParams::pole(3.0, -1.0).unwrap(),
    ] {
        let lam = if p.branch() == Branch::Tan { 4.5 } else { 4.0 };
        let a = if p.branch() == Branch::Tan { p.domain().lo } else { 0.0 };
        let fine = SolveOptions {
            rtol: 1e-14,
            atol: 1e-14,
            ..SolveOptions::default()
        };
        let reference = solve_ivp(&p, lam, a, &fine).unwrap().d;
        let err = |h: f64| {
            let opts = SolveOptions {
                series_terms: 0,
                pole_offset: Some(h),
                ..fine
            };
            (solve_ivp(&p, lam, a, &opts).unwrap().d - reference).abs()
        };
        let (e3, e4) = (err(1e-3), err(1e-4));
        let order = (e3 / e4).log10();
        assert!(order >= 1.9, "{:?}: observed order {order}", p.branch());
    }
}

#[test]
fn jeq_residual_is_second_order() {
    let res = |m: usize| {
        let p = CurvatureProfile::from_fn(Geometry::Circle { length: 1.0 }, m, 3, bump(1.0, 0.1)).unwrap();
        let s = solve_j(&p, 1.0, 2.0).unwrap();
        jeq_residual(&p, 1.0, &s).iter().fold(0.0f64, |a, r| a.max(r.abs()))
    };
    let (r1, r2) = (res(256), res(512));
    assert!((r1 / r2).log2() > 1.8, "{r1} {r2}");
}
