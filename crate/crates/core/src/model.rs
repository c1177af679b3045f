//! Drift functions of the one-dimensional model, their volume densities, and
//! the initial value problem `w'' - T w' + λ w = 0`, `w(a) = -1`, `w'(a) = 0`.
//!
//! Sign convention: the drift is chosen so that `-T = μ'/μ` for the model
//! density `μ`, i.e. the operator `w'' - T w'` is the radial part of the
//! Laplacian of the model space:
//!
//! | branch | `T(t)`                        | `μ(t)`                  | domain           |
//! |--------|-------------------------------|-------------------------|------------------|
//! | Tan    | `(N-1)√K tan(√K t)`           | `cos^{N-1}(√K t)`       | `(-π/2√K, π/2√K)`|
//! | Tanh   | `-(N-1)√-K tanh(√-K t)`       | `cosh^{N-1}(√-K t)`     | `ℝ`              |
//! | Coth   | `-(N-1)√-K coth(√-K t)`       | `sinh^{N-1}(√-K t)`     | `(0, ∞)`         |
//! | Zero   | `0`                           | `1`                     | `ℝ`              |
//!
//! Every branch solves `T' = T²/(N-1) + (N-1)K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Node, StepperOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Tan,
    Tanh,
    Coth,
    Zero,
}

/// Dimension `N`, curvature `K` and drift branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    dim: f64,
    curv: f64,
    branch: Branch,
}

/// Open interval of definition of the drift, with flags marking the
/// endpoints where the drift blows up (model poles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_singular: bool,
    pub hi_singular: bool,
}

impl Domain {
    pub fn contains_open(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    pub fn contains_closed(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

impl ModelParams {
    pub fn new(dim: f64, curv: f64, branch: Branch) -> Result<Self> {
        if !dim.is_finite() || !curv.is_finite() {
            return Err(Error::domain("dimension and curvature must be finite"));
        }
        let ok = match branch {
            Branch::Tan => curv > 0.0,
            Branch::Tanh | Branch::Coth => curv < 0.0,
            Branch::Zero => curv == 0.0,
        };
        if !ok {
            return Err(Error::domain(format!(
                "branch {branch:?} is incompatible with curvature {curv}"
            )));
        }
        if branch == Branch::Zero {
            if dim < 1.0 {
                return Err(Error::domain(format!("dimension {dim} < 1")));
            }
        } else if dim <= 1.0 {
            return Err(Error::domain(format!(
                "dimension {dim} must exceed 1 for a curved branch"
            )));
        }
        Ok(Self { dim, curv, branch })
    }

    /// The odd drift `T_{N,K}` used on symmetric intervals: Tan, Zero or Tanh
    /// according to the sign of `curv`.
    pub fn symmetric(dim: f64, curv: f64) -> Result<Self> {
        let branch = if curv > 0.0 {
            Branch::Tan
        } else if curv < 0.0 {
            Branch::Tanh
        } else {
            Branch::Zero
        };
        Self::new(dim, curv, branch)
    }

    /// The drift whose left endpoint is a model pole: Tan for `curv > 0`,
    /// Coth for `curv < 0`.
    pub fn pole(dim: f64, curv: f64) -> Result<Self> {
        if curv > 0.0 {
            Self::new(dim, curv, Branch::Tan)
        } else if curv < 0.0 {
            Self::new(dim, curv, Branch::Coth)
        } else {
            Err(Error::domain("no pole family for zero curvature"))
        }
    }

    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn curv(&self) -> f64 {
        self.curv
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    fn root(&self) -> f64 {
        self.curv.abs().sqrt()
    }

    /// Natural length `1/√|K|` (infinite for the flat branch).
    pub fn length_scale(&self) -> f64 {
        if self.curv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.root()
        }
    }

    /// Whether `T(-t) = -T(t)`, which makes symmetric intervals carry odd
    /// first eigenfunctions.
    pub fn is_odd(&self) -> bool {
        !matches!(self.branch, Branch::Coth)
    }

    pub fn domain(&self) -> Domain {
        match self.branch {
            Branch::Tan => {
                let half = std::f64::consts::FRAC_PI_2 / self.root();
                Domain {
                    lo: -half,
                    hi: half,
                    lo_singular: true,
                    hi_singular: true,
                }
            }
            Branch::Coth => Domain {
                lo: 0.0,
                hi: f64::INFINITY,
                lo_singular: true,
                hi_singular: false,
            },
            Branch::Tanh | Branch::Zero => Domain {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                lo_singular: false,
                hi_singular: false,
            },
        }
    }

    /// `(N-1)²|K|/4` for the hyperbolic branches: above it the asymptotic
    /// equation oscillates, at or below it `w'` may never vanish.
    pub fn essential_threshold(&self) -> Option<f64> {
        match self.branch {
            Branch::Tanh | Branch::Coth => {
                Some((self.dim - 1.0).powi(2) * self.curv.abs() / 4.0)
            }
            _ => None,
        }
    }

    fn check_open(&self, t: f64) -> Result<()> {
        if self.domain().contains_open(t) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "t = {t} is outside the open domain of the {:?} drift",
                self.branch
            )))
        }
    }

    #[inline]
    pub(crate) fn drift_unchecked(&self, t: f64) -> f64 {
        let s = self.root();
        let c = self.dim - 1.0;
        match self.branch {
            Branch::Tan => c * s * (s * t).tan(),
            Branch::Tanh => -c * s * (s * t).tanh(),
            Branch::Coth => -c * s / (s * t).tanh(),
            Branch::Zero => 0.0,
        }
    }

    /// `T(t)`.
    pub fn drift(&self, t: f64) -> Result<f64> {
        self.check_open(t)?;
        Ok(self.drift_unchecked(t))
    }

    /// `T'(t)` in closed form.
    pub fn drift_derivative(&self, t: f64) -> Result<f64> {
        self.check_open(t)?;
        let s = self.root();
        let c = self.dim - 1.0;
        Ok(match self.branch {
            Branch::Tan => {
                let cs = (s * t).cos();
                c * self.curv / (cs * cs)
            }
            Branch::Tanh => {
                let ch = (s * t).cosh();
                c * self.curv / (ch * ch)
            }
            Branch::Coth => {
                let sh = (s * t).sinh();
                -c * self.curv / (sh * sh)
            }
            Branch::Zero => 0.0,
        })
    }

    /// `T' - T²/(N-1) - (N-1)K`.
    pub fn riccati_residual(&self, t: f64) -> Result<f64> {
        let dt = self.drift_derivative(t)?;
        let tt = self.drift_unchecked(t);
        if self.branch == Branch::Zero {
            return Ok(dt);
        }
        let c = self.dim - 1.0;
        Ok(dt - tt * tt / c - c * self.curv)
    }

    /// Model density `μ(t)`, defined on the closed domain (vanishing at poles).
    pub fn weight(&self, t: f64) -> Result<f64> {
        let dom = self.domain();
        if !dom.contains_closed(t) || t.is_nan() {
            return Err(Error::domain(format!(
                "t = {t} is outside the domain of the {:?} density",
                self.branch
            )));
        }
        let s = self.root();
        let e = self.dim - 1.0;
        Ok(match self.branch {
            Branch::Tan => (s * t).cos().max(0.0).powf(e),
            Branch::Tanh => (s * t).cosh().powf(e),
            Branch::Coth => (s * t).sinh().powf(e),
            Branch::Zero => 1.0,
        })
    }
}

/// Free function form of [`ModelParams::drift`].
pub fn drift_eval(params: &ModelParams, t: f64) -> Result<f64> {
    params.drift(t)
}

/// Free function form of [`ModelParams::riccati_residual`].
pub fn riccati_residual(params: &ModelParams, t: f64) -> Result<f64> {
    params.riccati_residual(t)
}

/// Free function form of [`ModelParams::weight`].
pub fn weight_mu(params: &ModelParams, t: f64) -> Result<f64> {
    params.weight(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Maximal integration length measured from the start point.
    pub horizon: f64,
    /// Number of correction terms of the pole series beyond the constant
    /// `-1` (0, 1 or 2).
    pub series_terms: usize,
    /// Distance from a pole at which integration starts; chosen
    /// automatically when `None`.
    pub pole_offset: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            horizon: 1e3,
            series_terms: 2,
            pole_offset: None,
        }
    }
}

impl SolveOptions {
    pub fn tight() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            ..Self::default()
        }
    }
}

/// Dense solution of the initial value problem, sampled at accepted steps
/// and interpolated by quintic Hermite polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: Vec<Node>,
}

impl Trajectory {
    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Self {
        debug_assert!(nodes.len() >= 2);
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn t_start(&self) -> f64 {
        self.nodes[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].t
    }

    fn segment(&self, t: f64) -> Option<usize> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        let i = self.nodes.partition_point(|n| n.t <= t);
        Some(i.clamp(1, self.nodes.len() - 1) - 1)
    }

    /// `(w(t), w'(t))`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        let i = self.segment(t)?;
        Some(ode::hermite(&self.nodes[i], &self.nodes[i + 1], t))
    }

    /// Solves `w(t) = u` for `t` in `[lo, hi]`, assuming `w` increases there.
    pub fn inverse_on(&self, u: f64, lo: f64, hi: f64) -> Option<f64> {
        let (w_lo, _) = self.eval(lo)?;
        let (w_hi, _) = self.eval(hi)?;
        if u < w_lo || u > w_hi {
            return None;
        }
        if u == w_lo {
            return Some(lo);
        }
        if u == w_hi {
            return Some(hi);
        }
        // Narrow to one segment through the node values first.
        let i0 = self.segment(lo)?;
        let i1 = self.segment(hi)?;
        let mut a = lo;
        let mut b = hi;
        for n in &self.nodes[i0 + 1..=i1] {
            if n.t <= lo || n.t >= hi {
                continue;
            }
            if n.w < u {
                a = n.t;
            } else {
                b = n.t;
                break;
            }
        }
        let scale = a.abs().max(b.abs()).max(1e-300);
        Some(ode::bisect(
            |t| self.eval(t).map_or(f64::NAN, |(w, _)| w - u),
            a,
            b,
            1e-15 * scale,
        ))
    }

    /// Extends a solution computed on `[a, 0]` by the odd reflection
    /// `w(t) = -w(-t)`, valid when the drift is odd and `w(0) = 0`.
    fn mirror_odd(&self) -> Self {
        let mut nodes = self.nodes.clone();
        for n in self.nodes.iter().rev().skip(1) {
            nodes.push(Node {
                t: -n.t,
                w: -n.w,
                wp: n.wp,
                wpp: -n.wpp,
            });
        }
        Self { nodes }
    }
}

/// Solution of the initial value problem with its endpoint data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSolution {
    pub params: ModelParams,
    pub a: f64,
    pub lambda_bar: f64,
    pub trajectory: Trajectory,
    /// First positive distance at which `w'` vanishes; `+inf` when certified absent.
    pub d: f64,
    /// `a + d`.
    pub b: f64,
    /// `w(b)`; `NaN` when `d = inf`.
    pub m: f64,
    /// Set when `b` coincides with the right pole of the Tan branch, which
    /// happens exactly at `λ̄ = N K` for a start at the left pole.
    pub model_diameter_case: bool,
}

impl ModelSolution {
    pub fn is_finite(&self) -> bool {
        self.d.is_finite()
    }

    /// `(w, w')` at `t ∈ [a, b]`.
    pub fn eval(&self, t: f64) -> Option<(f64, f64)> {
        if t < self.a || t > self.b {
            return None;
        }
        self.trajectory.eval(t)
    }

    /// `w^{-1}(u)` on `[a, b]`, where `w` is increasing.
    pub fn inverse(&self, u: f64) -> Option<f64> {
        if !self.is_finite() {
            return None;
        }
        let hi = self.b.min(self.trajectory.t_end());
        self.trajectory.inverse_on(u, self.a, hi)
    }

    /// Accepted steps `(t, w, w')` up to `b`.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let b = self.b;
        self.trajectory
            .nodes()
            .iter()
            .filter(move |n| n.t <= b)
            .map(|n| (n.t, n.w, n.wp))
    }
}

enum Outcome {
    Zero(f64),
    Certified,
    Reached,
}

struct Run {
    nodes: Vec<Node>,
    outcome: Outcome,
}

fn check_lambda(lambda_bar: f64) -> Result<()> {
    if lambda_bar > 0.0 && lambda_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda_bar = {lambda_bar} must be positive")))
    }
}

fn relative_eq(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// Whether `a` sits on the singular left endpoint.
fn starts_at_pole(params: &ModelParams, a: f64) -> bool {
    let dom = params.domain();
    dom.lo_singular && relative_eq(a, dom.lo, 1e-14) || (dom.lo_singular && a == dom.lo)
}

/// Initial data at `a + h` from the regular expansion at a pole,
/// `w = -1 + c2 r² + c4 r⁴`, with `-T ≈ (N-1)(1/r - K r/3)`.
fn pole_series(params: &ModelParams, lambda: f64, r: f64, terms: usize) -> [f64; 2] {
    let n = params.dim();
    let c2 = lambda / (2.0 * n);
    let c4 = c2 * (2.0 * (n - 1.0) * params.curv() / 3.0 - lambda) / (4.0 * (n + 2.0));
    let mut w = -1.0;
    let mut wp = 0.0;
    if terms >= 1 {
        w += c2 * r * r;
        wp += 2.0 * c2 * r;
    }
    if terms >= 2 {
        w += c4 * r.powi(4);
        wp += 4.0 * c4 * r.powi(3);
    }
    [w, wp]
}

/// Lower barrier for `q = w'/w` beyond which `w` cannot reach zero, when
/// one exists at time `t` (hyperbolic branches at or below threshold).
fn riccati_barrier(params: &ModelParams, lambda: f64, t: f64) -> Option<f64> {
    let s = params.root();
    let c = (params.dim() - 1.0) * s;
    let damping = match params.branch() {
        // coth decreases to 1, so the asymptotic damping is the weakest one.
        Branch::Coth => c,
        // tanh increases, so the current damping is the weakest from now on.
        Branch::Tanh if t > 0.0 => c * (s * t).tanh(),
        _ => return None,
    };
    let disc = damping * damping - 4.0 * lambda;
    if disc < 0.0 {
        return None;
    }
    Some(0.5 * (-damping - disc.sqrt()))
}

fn run(
    params: &ModelParams,
    lambda: f64,
    a: f64,
    t_stop: f64,
    certify: bool,
    opts: &SolveOptions,
) -> Result<Run> {
    let dom = params.domain();
    if !(a >= dom.lo && a < dom.hi) {
        return Err(Error::domain(format!(
            "start point a = {a} is outside the domain [{}, {})",
            dom.lo, dom.hi
        )));
    }
    let scale = 1.0 / lambda.max(params.curv().abs()).sqrt();
    let osc = 1.0 / lambda.sqrt();

    let mut t_end = t_stop.min(a + opts.horizon);
    if dom.hi_singular {
        let eta = 1e-8 * (dom.hi - dom.lo);
        t_end = t_end.min(dom.hi - eta);
    }

    let at_pole = starts_at_pole(params, a);
    let mut head = Vec::new();
    let (t0, y0, h_init) = if at_pole {
        let h = opts.pole_offset.unwrap_or(1e-3 * scale);
        let y = pole_series(params, lambda, h, opts.series_terms);
        let n = params.dim();
        head.push(Node {
            t: dom.lo,
            w: -1.0,
            wp: 0.0,
            wpp: lambda / n,
        });
        (dom.lo + h, y, 0.5 * h)
    } else if dom.lo_singular {
        // Close to but off the pole: the step must resolve the drift scale.
        let h = (1e-3 * scale).min(0.1 * (a - dom.lo));
        (a, [-1.0, 0.0], h)
    } else {
        (a, [-1.0, 0.0], 1e-3 * scale)
    };
    if !(t_end > t0) {
        return Err(Error::domain(format!(
            "nothing to integrate: start {t0} is not below the end {t_end}"
        )));
    }

    let stepper = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init,
        h_max: 0.1 * osc,
        ..StepperOptions::default()
    };
    let mut outcome = Outcome::Reached;
    let accel = |t: f64, w: f64, wp: f64| params.drift_unchecked(t) * wp - lambda * w;
    let nodes = ode::integrate(accel, t0, y0, t_end, &stepper, |prev, node| {
        if prev.wp > 0.0 && node.wp <= 0.0 {
            let tz = ode::bisect(
                |t| ode::hermite(prev, node, t).1,
                prev.t,
                node.t,
                1e-15 * node.t.abs().max(scale),
            );
            outcome = Outcome::Zero(tz);
            return Control::Stop;
        }
        if certify && node.w < 0.0 && node.wp > 0.0 {
            if let Some(barrier) = riccati_barrier(params, lambda, node.t) {
                let q = node.wp / node.w;
                if q > barrier + 1e-8 * barrier.abs() {
                    outcome = Outcome::Certified;
                    return Control::Stop;
                }
            }
        }
        Control::Continue
    })?;
    head.extend(nodes);
    Ok(Run {
        nodes: head,
        outcome,
    })
}

/// Result of integrating from `a` no further than a stop point.
#[derive(Debug, Clone)]
pub struct Shot {
    pub trajectory: Trajectory,
    /// Location of the first positive zero of `w'`, if one occurs before the stop.
    pub zero: Option<f64>,
}

/// Integrates the initial value problem from `a` up to `t_stop` (clipped to
/// the domain and horizon), stopping early at the first zero of `w'`.
pub fn shoot(
    params: &ModelParams,
    lambda_bar: f64,
    a: f64,
    t_stop: f64,
    opts: &SolveOptions,
) -> Result<Shot> {
    check_lambda(lambda_bar)?;
    let r = run(params, lambda_bar, a, t_stop, false, opts)?;
    let zero = match r.outcome {
        Outcome::Zero(t) => Some(t),
        _ => None,
    };
    Ok(Shot {
        trajectory: Trajectory::from_nodes(r.nodes),
        zero,
    })
}

/// Solves the initial value problem from `a` until the first positive zero
/// of `w'`, a certificate that none exists, or the horizon.
pub fn solve_ivp(
    params: &ModelParams,
    lambda_bar: f64,
    a: f64,
    opts: &SolveOptions,
) -> Result<ModelSolution> {
    check_lambda(lambda_bar)?;
    let dom = params.domain();

    // Start at the left pole exactly at λ̄ = N K: the solution is odd and
    // its maximum sits on the right pole, so integrate half and reflect.
    if params.branch() == Branch::Tan
        && starts_at_pole(params, a)
        && relative_eq(lambda_bar, params.dim() * params.curv(), 1e-12)
    {
        let r = run(params, lambda_bar, dom.lo, 0.0, false, opts)?;
        let half = Trajectory::from_nodes(r.nodes);
        let (w0, _) = half.eval(0.0).expect("half trajectory ends at 0");
        if w0.abs() > 1e-6 {
            return Err(Error::IntegrationFailure {
                t: 0.0,
                reason: format!("odd model solution does not vanish at the centre (w = {w0})"),
            });
        }
        return Ok(ModelSolution {
            params: *params,
            a: dom.lo,
            lambda_bar,
            trajectory: half.mirror_odd(),
            d: dom.hi - dom.lo,
            b: dom.hi,
            m: 1.0,
            model_diameter_case: true,
        });
    }

    let r = run(params, lambda_bar, a, f64::INFINITY, true, opts)?;
    let trajectory = Trajectory::from_nodes(r.nodes);
    match r.outcome {
        Outcome::Zero(b) => {
            let (m, _) = trajectory.eval(b).expect("zero lies inside the trajectory");
            Ok(ModelSolution {
                params: *params,
                a,
                lambda_bar,
                trajectory,
                d: b - a,
                b,
                m,
                model_diameter_case: false,
            })
        }
        Outcome::Certified => Ok(infinite(params, a, lambda_bar, trajectory)),
        Outcome::Reached => {
            // Running into the right pole of the Tan branch without a zero:
            // w' blows up there, so no zero exists inside the domain.
            if dom.hi_singular && trajectory.t_end() < a + opts.horizon {
                Ok(infinite(params, a, lambda_bar, trajectory))
            } else {
                Err(Error::HorizonReached {
                    horizon: a + opts.horizon,
                })
            }
        }
    }
}

fn infinite(params: &ModelParams, a: f64, lambda_bar: f64, trajectory: Trajectory) -> ModelSolution {
    ModelSolution {
        params: *params,
        a,
        lambda_bar,
        trajectory,
        d: f64::INFINITY,
        b: f64::INFINITY,
        m: f64::NAN,
        model_diameter_case: false,
    }
}

/// The distance `d(a, T, λ̄)` alone.
pub fn first_zero_of_wprime(
    params: &ModelParams,
    lambda_bar: f64,
    a: f64,
    opts: &SolveOptions,
) -> Result<f64> {
    Ok(solve_ivp(params, lambda_bar, a, opts)?.d)
}

/// Distance from `0` to the first zero of `w'` for the odd solution
/// `w(0) = 0`, `w'(0) = 1` of an odd drift; half the symmetric interval
/// on which `λ̄` is the first Neumann eigenvalue. `None` when `w'` does not
/// vanish inside the domain.
pub(crate) fn odd_half_length(
    params: &ModelParams,
    lambda_bar: f64,
    opts: &SolveOptions,
) -> Result<Option<f64>> {
    debug_assert!(params.is_odd());
    check_lambda(lambda_bar)?;
    let dom = params.domain();
    let scale = 1.0 / lambda_bar.max(params.curv().abs()).sqrt();
    let mut t_end = opts.horizon;
    if dom.hi_singular {
        t_end = t_end.min(dom.hi * (1.0 - 1e-8));
    }
    let stepper = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: 1e-3 * scale,
        h_max: 0.1 / lambda_bar.sqrt(),
        ..StepperOptions::default()
    };
    let mut zero = None;
    let accel = |t: f64, w: f64, wp: f64| params.drift_unchecked(t) * wp - lambda_bar * w;
    ode::integrate(accel, 0.0, [0.0, 1.0], t_end, &stepper, |prev, node| {
        if prev.wp > 0.0 && node.wp <= 0.0 {
            zero = Some(ode::bisect(
                |t| ode::hermite(prev, node, t).1,
                prev.t,
                node.t,
                1e-15 * node.t.abs().max(scale),
            ));
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok(zero)
}

/// Solution on the symmetric interval `[-D/2, D/2]` with `w(-D/2) = -1`,
/// computed on the left half and reflected.
pub(crate) fn odd_solution(
    params: &ModelParams,
    lambda_bar: f64,
    length: f64,
    opts: &SolveOptions,
) -> Result<ModelSolution> {
    let a = -0.5 * length;
    let dom = params.domain();
    let a = if dom.lo_singular && relative_eq(a, dom.lo, 1e-12) {
        dom.lo
    } else {
        a
    };
    let r = run(params, lambda_bar, a, 0.0, false, opts)?;
    let half = Trajectory::from_nodes(r.nodes);
    if half.t_end() != 0.0 {
        return Err(Error::IntegrationFailure {
            t: half.t_end(),
            reason: "odd solution did not reach the centre".into(),
        });
    }
    let (w0, _) = half.eval(0.0).expect("half trajectory ends at 0");
    if w0.abs() > 1e-6 {
        return Err(Error::IntegrationFailure {
            t: 0.0,
            reason: format!("odd solution does not vanish at the centre (w = {w0})"),
        });
    }
    Ok(ModelSolution {
        params: *params,
        a,
        lambda_bar,
        trajectory: half.mirror_odd(),
        d: -2.0 * a,
        b: -a,
        m: 1.0,
        model_diameter_case: dom.hi_singular && relative_eq(-a, dom.hi, 1e-12),
    })
}
