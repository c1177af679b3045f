//! First nonzero Neumann eigenvalue of `L_T = d²/dt² - T d/dt` on intervals.
//!
//! Two independent routes are provided. Shooting bisects on `λ` using the
//! fact that the first zero `d(a, T, λ)` of `w'` decreases strictly in `λ`,
//! so `λ₁(T, [a, b])` is the `λ` at which that zero lands exactly on `b`.
//! The finite-volume oracle discretises the self-adjoint form
//! `(μ w')'/μ + λ w = 0` on a cell-centred mesh, which never samples the
//! density at the interval ends where it may vanish.

use std::f64::consts::PI;

use crate::bounds::shi_zhang;
use crate::error::{Error, Result};
use crate::model::{self, Branch, ModelParams, SolveOptions};
use crate::tridiag;

/// Neumann eigenvalue problem on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenQuery {
    pub params: ModelParams,
    pub a: f64,
    pub b: f64,
    /// Relative tolerance on `λ`.
    pub tol: f64,
}

impl EigenQuery {
    pub fn new(params: ModelParams, a: f64, b: f64) -> Result<Self> {
        let dom = params.domain();
        if !(b > a) {
            return Err(Error::domain(format!("empty interval [{a}, {b}]")));
        }
        if !(dom.contains_closed(a) && dom.contains_closed(b)) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!(
                "interval [{a}, {b}] is not inside the domain [{}, {}]",
                dom.lo, dom.hi
            )));
        }
        Ok(Self {
            params,
            a,
            b,
            tol: 1e-10,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Symmetric interval `[-D/2, D/2]`, snapping onto the poles when `D`
    /// equals the model diameter up to rounding.
    pub fn symmetric(params: ModelParams, length: f64) -> Result<Self> {
        let dom = params.domain();
        let mut half = 0.5 * length;
        if dom.hi_singular && half > dom.hi && half <= dom.hi * (1.0 + 1e-12) {
            half = dom.hi;
        }
        Self::new(params, -half, half)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// Whether the first zero of `w'` started at `q.a` lies at or before `q.b`.
fn zero_before_end(q: &EigenQuery, lambda: f64, opts: &SolveOptions) -> Result<bool> {
    let dom = q.params.domain();
    let stop = if dom.hi_singular && q.b >= dom.hi {
        f64::INFINITY
    } else {
        q.b
    };
    // w' is of size λ·(b-a); an absolute tolerance above that lets rounding
    // fake a sign change of w' at small λ.
    let opts = SolveOptions {
        atol: opts.atol * (lambda * q.length().powi(2)).min(1.0),
        ..*opts
    };
    let shot = model::shoot(&q.params, lambda, q.a, stop, &opts)?;
    Ok(matches!(shot.zero, Some(t) if t <= q.b))
}

fn shooting_options() -> SolveOptions {
    SolveOptions {
        horizon: f64::INFINITY,
        ..SolveOptions::tight()
    }
}

/// Smallest `λ > 0` with `d(a, T, λ) = b - a`, by bisection.
pub fn neumann_eigenvalue_shooting(q: &EigenQuery) -> Result<f64> {
    let opts = shooting_options();
    let p = q.params;
    let len = q.length();
    let base = PI * PI / (len * len);

    let mut lo = if p.dim() >= 2.0 {
        shi_zhang(p.dim(), p.curv(), len)?.max(1e-12)
    } else {
        1e-12
    };
    // The bound applies to the symmetric model; keep a margin and fall back
    // geometrically in case the query is not covered by it.
    lo *= 0.5;
    let mut tries = 0;
    while zero_before_end(q, lo, &opts)? {
        lo *= 0.1;
        tries += 1;
        if tries > 40 {
            return Err(Error::BracketFailure { lo, hi: lo });
        }
    }
    let threshold = p.essential_threshold().unwrap_or(0.0);
    let mut hi = 8.0 * base.max(p.dim() * p.curv().max(0.0)).max(threshold + base);
    let mut tries = 0;
    while !zero_before_end(q, hi, &opts)? {
        lo = hi;
        hi *= 4.0;
        tries += 1;
        if tries > 30 {
            return Err(Error::BracketFailure { lo, hi });
        }
    }

    let tol = q.tol.max(1e-15);
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if zero_before_end(q, mid, &opts)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `λ₁(n, K, D)`: first nonzero Neumann eigenvalue of `w'' - T_{n,K} w'`
/// on `[-D/2, D/2]`.
pub fn lambda1_model(n: f64, k: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("diameter D = {d} must be positive")));
    }
    if k != 0.0 && !(n >= 2.0) {
        return Err(Error::domain(format!("dimension n = {n} must be at least 2")));
    }
    if k > 0.0 && d > PI / k.sqrt() * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "D = {d} exceeds the model diameter π/√K = {}",
            PI / k.sqrt()
        )));
    }
    let params = ModelParams::symmetric(n, k)?;
    neumann_eigenvalue_shooting(&EigenQuery::symmetric(params, d)?)
}

/// Whether `λ̄ = N K̄` on the Tan branch, where the symmetric interval is
/// the whole model domain.
pub fn is_model_diameter_case(params: &ModelParams, lambda_bar: f64) -> bool {
    params.branch() == Branch::Tan
        && (lambda_bar - params.dim() * params.curv()).abs()
            <= 1e-12 * params.dim() * params.curv()
}

/// `d_{N,K̄,λ̄}`: the length `D` of the symmetric interval whose first
/// Neumann eigenvalue equals `λ̄`.
///
/// The eigenfunction on a symmetric interval is odd, so `D/2` is the first
/// zero of `w'` for the solution with `w(0) = 0`, `w'(0) = 1`.
pub fn symmetric_interval_length(params: &ModelParams, lambda_bar: f64) -> Result<f64> {
    symmetric_interval_length_with(params, lambda_bar, &SolveOptions::tight())
}

pub fn symmetric_interval_length_with(
    params: &ModelParams,
    lambda_bar: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    if !params.is_odd() {
        return Err(Error::domain(
            "symmetric intervals need an odd drift (Tan, Tanh or Zero)",
        ));
    }
    if !(lambda_bar > 0.0 && lambda_bar.is_finite()) {
        return Err(Error::domain(format!("lambda_bar = {lambda_bar} must be positive")));
    }
    if params.branch() == Branch::Tan {
        let nk = params.dim() * params.curv();
        if is_model_diameter_case(params, lambda_bar) {
            return Ok(PI / params.curv().sqrt());
        }
        if lambda_bar < nk {
            return Err(Error::domain(format!(
                "lambda_bar = {lambda_bar} is below N K = {nk}"
            )));
        }
    }
    match model::odd_half_length(params, lambda_bar, opts)? {
        Some(half) => Ok(2.0 * half),
        None => match params.essential_threshold() {
            Some(th) if lambda_bar <= th => Err(Error::domain(format!(
                "lambda_bar = {lambda_bar} is at or below the threshold {th}: \
                 no finite symmetric interval"
            ))),
            _ => Err(Error::HorizonReached {
                horizon: opts.horizon,
            }),
        },
    }
}

const MIN_MESH: usize = 16;

/// Symmetric tridiagonal form `B^{-1/2} A B^{-1/2}` of the finite-volume
/// pencil on `m` cells.
fn fd_matrix(q: &EigenQuery, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m < MIN_MESH {
        return Err(Error::MeshTooCoarse {
            points: m,
            min: MIN_MESH,
        });
    }
    let h = q.length() / m as f64;
    let weight = |t: f64| -> Result<f64> {
        match q.params.weight(t) {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            _ => Err(Error::SingularWeight { t }),
        }
    };
    let mass: Vec<f64> = (0..m)
        .map(|i| weight(q.a + (i as f64 + 0.5) * h))
        .collect::<Result<_>>()?;
    let face: Vec<f64> = (1..m)
        .map(|i| weight(q.a + i as f64 * h))
        .collect::<Result<_>>()?;
    let h2 = h * h;
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let left = if i > 0 { face[i - 1] } else { 0.0 };
            let right = if i + 1 < m { face[i] } else { 0.0 };
            (left + right) / (h2 * mass[i])
        })
        .collect();
    let off: Vec<f64> = (0..m - 1)
        .map(|i| -face[i] / (h2 * (mass[i] * mass[i + 1]).sqrt()))
        .collect();
    Ok((diag, off))
}

/// Second-smallest eigenvalue of the finite-volume discretisation with
/// `mesh_points` cells; second order in the cell width.
pub fn fd_oracle_eigenvalue(q: &EigenQuery, mesh_points: usize) -> Result<f64> {
    let (diag, off) = fd_matrix(q, mesh_points)?;
    let ground = tridiag::kth_eigenvalue(&diag, &off, 0);
    let first = tridiag::kth_eigenvalue(&diag, &off, 1);
    // The constant mode is an exact null vector; its computed eigenvalue can
    // only be off by the rounding level of the Sturm count.
    let (glo, ghi) = tridiag::gershgorin(&diag, &off);
    let rounding = 64.0 * f64::EPSILON * glo.abs().max(ghi.abs());
    if ground.abs() > 1e-8 * first + rounding {
        return Err(Error::NoConvergence(format!(
            "discrete constant mode has eigenvalue {ground}, not ≈ 0"
        )));
    }
    Ok(first)
}

/// Richardson extrapolation `(4λ_{2M} - λ_M)/3` over meshes `M` and `2M`.
pub fn fd_oracle_richardson(q: &EigenQuery, mesh_points: usize) -> Result<f64> {
    let coarse = fd_oracle_eigenvalue(q, mesh_points)?;
    let fine = fd_oracle_eigenvalue(q, 2 * mesh_points)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_ivp;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn params(n: f64, k: f64, branch: Branch) -> ModelParams {
        ModelParams::new(n, k, branch).unwrap()
    }

    #[test]
    fn shooting_anchors() {
        let q = EigenQuery::new(params(3.0, 0.0, Branch::Zero), -FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_relative_eq!(neumann_eigenvalue_shooting(&q).unwrap(), 1.0, max_relative = 1e-9);
        let q = EigenQuery::new(params(3.0, 1.0, Branch::Tan), -FRAC_PI_2, FRAC_PI_2).unwrap();
        assert_relative_eq!(neumann_eigenvalue_shooting(&q).unwrap(), 3.0, max_relative = 1e-9);
    }

    #[test]
    fn shooting_matches_fd_for_tanh() {
        let q = EigenQuery::new(params(3.0, -1.0, Branch::Tanh), -1.0, 1.0).unwrap();
        let shot = neumann_eigenvalue_shooting(&q).unwrap();
        let fd = fd_oracle_richardson(&q, 1024).unwrap();
        assert_relative_eq!(shot, fd, max_relative = 1e-6);
    }

    #[test]
    fn shooting_matches_fd_off_centre() {
        let q = EigenQuery::new(params(4.0, -1.0, Branch::Tanh), -1.0, 0.7).unwrap();
        let shot = neumann_eigenvalue_shooting(&q).unwrap();
        assert_relative_eq!(shot, fd_oracle_richardson(&q, 1024).unwrap(), max_relative = 1e-6);
        let q = EigenQuery::new(params(3.0, -1.0, Branch::Coth), 0.3, 2.0).unwrap();
        let shot = neumann_eigenvalue_shooting(&q).unwrap();
        assert_relative_eq!(shot, fd_oracle_richardson(&q, 1024).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn coth_from_the_pole_agrees_with_fd() {
        let coth = params(3.0, -1.0, Branch::Coth);
        let sol = solve_ivp(&coth, 2.0, 0.0, &SolveOptions::default()).unwrap();
        let q = EigenQuery::new(coth, 0.0, sol.b).unwrap();
        let fd = fd_oracle_richardson(&q, 1024).unwrap();
        assert_relative_eq!(fd, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn first_zero_tanh_agrees_with_fd() {
        let tanh = params(4.0, -1.0, Branch::Tanh);
        let d = model::first_zero_of_wprime(&tanh, 5.0, -1.0, &SolveOptions::tight()).unwrap();
        let q = EigenQuery::new(tanh, -1.0, -1.0 + d).unwrap();
        assert_relative_eq!(fd_oracle_richardson(&q, 1024).unwrap(), 5.0, max_relative = 1e-6);
    }

    #[test]
    fn model_anchors() {
        assert_relative_eq!(lambda1_model(3.0, 0.0, PI).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(lambda1_model(3.0, 1.0, PI).unwrap(), 3.0, max_relative = 1e-8);
        assert!(lambda1_model(3.0, 1.0, 3.2).is_err());
    }

    #[test]
    fn model_negative_curvature_sandwich() {
        let v = lambda1_model(3.0, -1.0, 1.0).unwrap();
        assert!(v >= shi_zhang(3.0, -1.0, 1.0).unwrap());
        assert!(v <= PI * PI);
        let q = EigenQuery::symmetric(ModelParams::symmetric(3.0, -1.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(v, fd_oracle_richardson(&q, 1024).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn symmetric_length_examples() {
        let zero = params(3.0, 0.0, Branch::Zero);
        assert_relative_eq!(symmetric_interval_length(&zero, 1.0).unwrap(), PI, max_relative = 1e-10);
        let tan = params(3.0, 1.0, Branch::Tan);
        assert_relative_eq!(symmetric_interval_length(&tan, 3.0).unwrap(), PI, max_relative = 1e-12);
        assert!(is_model_diameter_case(&tan, 3.0));
        assert!(symmetric_interval_length(&tan, 2.9).is_err());
        let tanh = params(3.0, -1.0, Branch::Tanh);
        let d = symmetric_interval_length(&tanh, 2.0).unwrap();
        assert_relative_eq!(lambda1_model(3.0, -1.0, d).unwrap(), 2.0, max_relative = 1e-8);
        let coth = params(3.0, -1.0, Branch::Coth);
        assert!(symmetric_interval_length(&coth, 2.0).is_err());
    }

    #[test]
    fn symmetric_length_just_above_sphere_value() {
        let tan = params(3.0, 1.0, Branch::Tan);
        let d = symmetric_interval_length(&tan, 3.3).unwrap();
        assert!(d < PI);
        assert_relative_eq!(lambda1_model(3.0, 1.0, d).unwrap(), 3.3, max_relative = 1e-8);
    }

    #[test]
    fn fd_examples() {
        let q = EigenQuery::new(params(3.0, 0.0, Branch::Zero), 0.0, PI).unwrap();
        assert!((fd_oracle_eigenvalue(&q, 512).unwrap() - 1.0).abs() < 1e-5);
        let q = EigenQuery::new(params(3.0, 1.0, Branch::Tan), -FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((fd_oracle_eigenvalue(&q, 1024).unwrap() - 3.0).abs() < 1e-4);
    }

    #[test]
    fn fd_rejects_coarse_meshes() {
        let q = EigenQuery::new(params(3.0, 0.0, Branch::Zero), 0.0, 1.0).unwrap();
        assert!(matches!(
            fd_oracle_eigenvalue(&q, 8),
            Err(Error::MeshTooCoarse { points: 8, .. })
        ));
    }

    #[test]
    fn fd_is_second_order() {
        let q = EigenQuery::new(params(3.0, -1.0, Branch::Tanh), -0.8, 1.1).unwrap();
        let exact = neumann_eigenvalue_shooting(&q).unwrap();
        let e1 = (fd_oracle_eigenvalue(&q, 128).unwrap() - exact).abs();
        let e2 = (fd_oracle_eigenvalue(&q, 256).unwrap() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.9 && order < 2.1, "order {order}");
    }

    #[test]
    fn queries_are_validated() {
        let tan = params(3.0, 1.0, Branch::Tan);
        assert!(EigenQuery::new(tan, -2.0, 0.0).is_err());
        assert!(EigenQuery::new(tan, 0.5, 0.5).is_err());
    }
}
