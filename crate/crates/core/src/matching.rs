//! Choosing the start point `a` so that the Neumann solution on
//! `[a, b(a)]` has a prescribed maximum `u*` (its minimum is `-1` by
//! construction).
//!
//! Families used, with `s = √|K̄|`:
//! * `K̄ > 0`: Tan drift with `a` between the left pole (maximum `m_min`)
//!   and the symmetric start `-d_sym/2` (maximum 1).
//! * `K̄ < 0`, `λ̄` above the threshold `(N-1)²|K̄|/4`: Tanh drift from the
//!   symmetric start rightwards, where the maximum falls from 1 to the
//!   limit `exp(-cπ/2ω)` of the constant-damping equation, and the Coth
//!   drift from its pole, whose maximum rises from `m_min` to that limit.
//! * `K̄ < 0` at or below the threshold: Tanh drift from the symmetric start
//!   rightwards; the maximum decreases to 0 where `d` becomes infinite.

use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_interval_length;
use crate::error::{Error, Result};
use crate::model::{self, Branch, ModelParams, ModelSolution, SolveOptions};

/// Accepted distance between the attained and requested maximum.
pub const MATCH_TOL: f64 = 1e-8;

/// Number of continuation steps before bisection.
const CONTINUATION_STEPS: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    SymmetricOdd,
    SubThreshold,
    SuperThreshold,
    PositiveCurv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub a: f64,
    pub b: f64,
    pub solution: ModelSolution,
    pub u_star_achieved: f64,
    pub case_tag: CaseTag,
}

impl MatchResult {
    pub fn branch(&self) -> Branch {
        self.solution.params.branch()
    }
}

fn opts() -> SolveOptions {
    SolveOptions::tight()
}

/// Minimal maximum over the family started at the model pole
/// (`-π/(2√K̄)` for `K̄ > 0`, `0` for `K̄ < 0`).
pub fn m_min(params: &ModelParams, lambda_bar: f64) -> Result<f64> {
    let (dim, curv) = (params.dim(), params.curv());
    if curv == 0.0 {
        return Ok(1.0);
    }
    let pole = ModelParams::pole(dim, curv)?;
    if curv > 0.0 && lambda_bar < dim * curv * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "lambda_bar = {lambda_bar} is below N K = {}",
            dim * curv
        )));
    }
    let sol = model::solve_ivp(&pole, lambda_bar, pole.domain().lo, &opts())?;
    if !sol.is_finite() {
        return Err(Error::CertifiedInfinite);
    }
    Ok(sol.m)
}

/// Sup-norm distance on `[-b, -a]` between the solution started at `-b`
/// and the reflection `x ↦ -w(-x)/m` of the solution started at `a`.
///
/// When `a` is a pole the comparison stops short of `-a`: the reflected
/// solution is the regular one there, which forward integration can only
/// follow up to the growth of the singular mode.
pub fn reflection_check(params: &ModelParams, lambda_bar: f64, a: f64) -> Result<f64> {
    if !params.is_odd() {
        return Err(Error::domain("reflection needs an odd drift (Tan, Tanh or Zero)"));
    }
    let o = opts();
    let w = model::solve_ivp(params, lambda_bar, a, &o)?;
    if !w.is_finite() {
        return Err(Error::CertifiedInfinite);
    }
    let (b, m) = (w.b, w.m);
    let len = b - a;
    let dom = params.domain();
    let at_pole = dom.lo_singular && (a - dom.lo).abs() <= 1e-12 * dom.lo.abs();
    let end = if at_pole { -a - 0.05 * len } else { -a };

    let v = model::shoot(params, lambda_bar, -b, end, &o)?;
    let mut worst: f64 = 0.0;
    if let Some(z) = v.zero {
        if z < end {
            worst = worst.max(-a - z);
        }
    }
    let reach = end.min(v.trajectory.t_end());
    let samples = 2000;
    for i in 0..=samples {
        let x = (-b + (reach + b) * i as f64 / samples as f64).min(reach);
        let (vx, _) = v.trajectory.eval(x).expect("x inside the shot");
        let (wx, _) = w.trajectory.eval((-x).max(a)).expect("-x inside [a, b]");
        worst = worst.max((vx + wx / m).abs());
    }
    Ok(worst)
}

fn solve_m(family: &ModelParams, lambda_bar: f64, a: f64) -> Result<Option<ModelSolution>> {
    let sol = model::solve_ivp(family, lambda_bar, a, &opts())?;
    Ok(sol.is_finite().then_some(sol))
}

/// Walks `a` from `a_start` (maximum on one side of `u*`) towards `a_end`,
/// then bisects on the first bracket.
fn search(
    family: &ModelParams,
    lambda_bar: f64,
    u_star: f64,
    a_start: f64,
    a_end: f64,
) -> Result<ModelSolution> {
    let first = solve_m(family, lambda_bar, a_start)?
        .ok_or_else(|| Error::NoConvergence("start of the family has d = inf".into()))?;
    if (first.m - u_star).abs() <= 0.1 * MATCH_TOL {
        return Ok(first);
    }
    let above = first.m > u_star;
    let ratio: f64 = 1.08;
    let total = ratio.powi(CONTINUATION_STEPS) - 1.0;
    let mut prev_a = a_start;
    let mut last = first;
    for k in 1..=CONTINUATION_STEPS {
        let frac = if k == CONTINUATION_STEPS {
            1.0
        } else {
            (ratio.powi(k) - 1.0) / total
        };
        let a = a_start + (a_end - a_start) * frac;
        match solve_m(family, lambda_bar, a)? {
            Some(sol) if (sol.m > u_star) == above && (sol.m - u_star).abs() > 0.1 * MATCH_TOL => {
                prev_a = a;
                last = sol;
            }
            _ => return bisect(family, lambda_bar, u_star, prev_a, a, above),
        }
    }
    if (last.m - u_star).abs() <= MATCH_TOL {
        return Ok(last);
    }
    Err(Error::NoConvergence(format!(
        "maximum {} at the end of the family does not reach u* = {u_star}",
        last.m
    )))
}

/// Bisection on `a` between a start on the `above` side of `u*` and one
/// on the other side (or with `d = inf`, where the maximum tends to 0).
fn bisect(
    family: &ModelParams,
    lambda_bar: f64,
    u_star: f64,
    mut keep: f64,
    mut flip: f64,
    above: bool,
) -> Result<ModelSolution> {
    let mut best: Option<ModelSolution> = None;
    for _ in 0..200 {
        let mid = 0.5 * (keep + flip);
        if mid == keep || mid == flip {
            break;
        }
        match solve_m(family, lambda_bar, mid)? {
            Some(sol) => {
                let err = (sol.m - u_star).abs();
                if best.as_ref().is_none_or(|b| err < (b.m - u_star).abs()) {
                    best = Some(sol.clone());
                }
                if err <= 0.01 * MATCH_TOL {
                    break;
                }
                if (sol.m > u_star) == above {
                    keep = mid;
                } else {
                    flip = mid;
                }
            }
            None => flip = mid,
        }
    }
    for a in [keep, flip] {
        if let Some(sol) = solve_m(family, lambda_bar, a)? {
            if best.as_ref().is_none_or(|b| (sol.m - u_star).abs() < (b.m - u_star).abs()) {
                best = Some(sol);
            }
        }
    }
    match best {
        Some(sol) if (sol.m - u_star).abs() <= MATCH_TOL => Ok(sol),
        Some(sol) => Err(Error::NoConvergence(format!(
            "bisection stalled at maximum {} for u* = {u_star}",
            sol.m
        ))),
        None => Err(Error::NoConvergence("no finite solution in the bracket".into())),
    }
}

fn result(sol: ModelSolution, case_tag: CaseTag) -> MatchResult {
    MatchResult {
        a: sol.a,
        b: sol.b,
        u_star_achieved: sol.m,
        solution: sol,
        case_tag,
    }
}

/// Finds the start point whose Neumann solution has maximum `u*`.
pub fn match_maximum(params: &ModelParams, lambda_bar: f64, u_star: f64) -> Result<MatchResult> {
    if !(u_star > 0.0 && u_star <= 1.0) {
        return Err(Error::domain(format!("u* = {u_star} must lie in (0, 1]")));
    }
    if !(lambda_bar > 0.0 && lambda_bar.is_finite()) {
        return Err(Error::domain(format!("lambda_bar = {lambda_bar} must be positive")));
    }
    let (dim, curv) = (params.dim(), params.curv());
    let sym = ModelParams::symmetric(dim, curv)?;
    let o = opts();

    if curv > 0.0 && lambda_bar < dim * curv * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "lambda_bar = {lambda_bar} is below N K = {}",
            dim * curv
        )));
    }
    let sym_length = symmetric_interval_length(&sym, lambda_bar)?;
    let a_sym = -0.5 * sym_length;

    if 1.0 - u_star <= 1e-12 {
        let sol = model::odd_solution(&sym, lambda_bar, sym_length, &o)?;
        return Ok(result(sol, CaseTag::SymmetricOdd));
    }
    if curv == 0.0 {
        return Err(Error::TargetBelowMinimum {
            u_star,
            m_min: 1.0,
        });
    }

    let s = curv.abs().sqrt();
    if curv > 0.0 {
        let lo = sym.domain().lo;
        let floor = m_min(params, lambda_bar)?;
        if u_star < floor - MATCH_TOL {
            return Err(Error::TargetBelowMinimum {
                u_star,
                m_min: floor,
            });
        }
        if u_star <= floor + 0.1 * MATCH_TOL {
            let sol = model::solve_ivp(&sym, lambda_bar, lo, &o)?;
            return Ok(result(sol, CaseTag::PositiveCurv));
        }
        let sol = search(&sym, lambda_bar, u_star, a_sym, lo)?;
        return Ok(result(sol, CaseTag::PositiveCurv));
    }

    let threshold = sym.essential_threshold().expect("hyperbolic branch");
    let reach = a_sym.max(0.0) + 40.0 / s;
    if lambda_bar <= threshold {
        let sol = search(&sym, lambda_bar, u_star, a_sym, reach)?;
        return Ok(result(sol, CaseTag::SubThreshold));
    }

    let floor = m_min(params, lambda_bar)?;
    if u_star < floor - MATCH_TOL {
        return Err(Error::TargetBelowMinimum {
            u_star,
            m_min: floor,
        });
    }
    let c = (dim - 1.0) * s;
    let omega = (lambda_bar - 0.25 * c * c).sqrt();
    let m_limit = (-c * std::f64::consts::PI / (2.0 * omega)).exp();
    let sol = if u_star >= m_limit {
        search(&sym, lambda_bar, u_star, a_sym, reach)?
    } else {
        let coth = ModelParams::pole(dim, curv)?;
        if u_star <= floor + 0.1 * MATCH_TOL {
            model::solve_ivp(&coth, lambda_bar, 0.0, &o)?
        } else {
            search(&coth, lambda_bar, u_star, 0.0, 40.0 / s)?
        }
    };
    Ok(result(sol, CaseTag::SuperThreshold))
}

/// `√(1-δ) (w^{-1}(-1+ε) - a)` for the solution started at `a`.
pub fn r_epsilon(
    params: &ModelParams,
    lambda_bar: f64,
    a: f64,
    delta: f64,
    eps: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::domain(format!("delta = {delta} must lie in [0, 1)")));
    }
    let sol = model::solve_ivp(params, lambda_bar, a, &opts())?;
    r_epsilon_of(&sol, delta, eps)
}

/// [`r_epsilon`] for an already computed solution.
pub fn r_epsilon_of(sol: &ModelSolution, delta: f64, eps: f64) -> Result<f64> {
    if !sol.is_finite() {
        return Err(Error::CertifiedInfinite);
    }
    if !(eps >= 0.0 && eps < 1.0 + sol.m) {
        return Err(Error::domain(format!(
            "eps = {eps} must lie in [0, 1 + m) with m = {}",
            sol.m
        )));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let t = sol
        .inverse(-1.0 + eps)
        .ok_or_else(|| Error::NoConvergence("inverse of w failed".into()))?;
    Ok((1.0 - delta).sqrt() * (t - sol.a))
}
