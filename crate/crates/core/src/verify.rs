//! Checks of the comparison inequalities against manifolds with closed-form
//! spectra, and of the diameter rescaling chain at the level of the 1D
//! models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::CONSISTENCY_SLACK;
use crate::eigen::{lambda1_model, symmetric_interval_length};
use crate::error::{Error, Result};
use crate::model::{self, ModelParams, SolveOptions};
use crate::perturbation::{choose_k_bar, choose_lambda_bar, choose_n};

/// Label-friendly rendering rounded to four decimals.
fn short(x: f64) -> String {
    format!("{}", (x * 1e4).round() / 1e4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ManifoldKind {
    RoundSphere { n: usize, radius: f64 },
    FlatTorus { lengths: Vec<f64> },
    Circle { length: f64 },
}

/// A closed manifold with known first eigenvalue, diameter and Ricci bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifold {
    pub name: String,
    pub kind: ManifoldKind,
    pub dim: usize,
    pub lambda1_exact: f64,
    pub diameter_exact: f64,
    /// `(n-1)K`.
    pub ricci_lower: f64,
}

impl ModelManifold {
    pub fn round_sphere(n: usize, radius: f64) -> Result<Self> {
        if n < 2 || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!(
                "sphere needs n >= 2 and a positive radius (got n = {n}, r = {radius})"
            )));
        }
        let k = 1.0 / (radius * radius);
        Ok(Self {
            name: format!("S{n}(r={})", short(radius)),
            kind: ManifoldKind::RoundSphere { n, radius },
            dim: n,
            lambda1_exact: n as f64 * k,
            diameter_exact: PI * radius,
            ricci_lower: (n as f64 - 1.0) * k,
        })
    }

    pub fn flat_torus(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::domain("torus side lengths must be positive"));
        }
        let max = lengths.iter().cloned().fold(0.0, f64::max);
        let diam = 0.5 * lengths.iter().map(|l| l * l).sum::<f64>().sqrt();
        let sides: Vec<String> = lengths.iter().map(|l| short(*l)).collect();
        Ok(Self {
            name: format!("T{}({})", lengths.len(), sides.join("x")),
            dim: lengths.len(),
            lambda1_exact: (2.0 * PI / max).powi(2),
            diameter_exact: diam,
            ricci_lower: 0.0,
            kind: ManifoldKind::FlatTorus { lengths },
        })
    }

    pub fn circle(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain("circle length must be positive"));
        }
        Ok(Self {
            name: format!("S1(L={})", short(length)),
            kind: ManifoldKind::Circle { length },
            dim: 1,
            lambda1_exact: (2.0 * PI / length).powi(2),
            diameter_exact: 0.5 * length,
            ricci_lower: 0.0,
        })
    }

    /// Curvature lower bound `K`, the Ricci bound divided by `n - 1`.
    pub fn curvature(&self) -> f64 {
        if self.dim > 1 {
            self.ricci_lower / (self.dim as f64 - 1.0)
        } else {
            0.0
        }
    }
}

/// Manifolds exercised by the `verify` command.
pub fn catalog() -> Vec<ModelManifold> {
    vec![
        ModelManifold::round_sphere(2, 1.0),
        ModelManifold::round_sphere(3, 1.0),
        ModelManifold::round_sphere(3, 2.0),
        ModelManifold::round_sphere(4, 1.0),
        ModelManifold::round_sphere(5, 0.5),
        ModelManifold::flat_torus(vec![2.0 * PI; 3]),
        ModelManifold::flat_torus(vec![1.0, 2.0]),
        ModelManifold::flat_torus(vec![1.0, 1.0, 3.0, 1.5]),
        ModelManifold::circle(2.0 * PI),
    ]
    .into_iter()
    .map(|m| m.expect("catalog entries are valid"))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub manifold: String,
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha: f64,
    pub lambda1_exact: f64,
    pub model_lambda1: f64,
    /// `λ₁(M) - α λ₁(n, K, D)`.
    pub slack: f64,
    pub pass: bool,
}

/// Evaluates `λ₁(M) ≥ α λ₁(n, K, D)` for a catalog manifold.
pub fn check_main_inequality(m: &ModelManifold, alpha: f64) -> Result<InequalityReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    let k = m.curvature();
    let model = lambda1_model(m.dim as f64, k, m.diameter_exact)?;
    let slack = m.lambda1_exact - alpha * model;
    Ok(InequalityReport {
        manifold: m.name.clone(),
        dim: m.dim,
        k,
        d: m.diameter_exact,
        alpha,
        lambda1_exact: m.lambda1_exact,
        model_lambda1: model,
        slack,
        pass: slack >= -CONSISTENCY_SLACK * m.lambda1_exact.max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub n: usize,
    pub latitudes: usize,
    /// `sup |w'(w⁻¹(u)) - √(1-u²)|` over the latitudes.
    pub sup_discrepancy: f64,
}

/// Compares the model gradient profile with `|∇u| = √(1-u²)` for
/// `u = cos(distance to a pole)` on the unit `n`-sphere.
pub fn gradient_comparison_sphere(n: usize) -> Result<GradientReport> {
    gradient_comparison_sphere_with(n, 1000)
}

pub fn gradient_comparison_sphere_with(n: usize, latitudes: usize) -> Result<GradientReport> {
    if n < 2 {
        return Err(Error::domain(format!("sphere dimension n = {n} must be at least 2")));
    }
    if latitudes < 2 {
        return Err(Error::domain("need at least two latitudes"));
    }
    let params = ModelParams::symmetric(n as f64, 1.0)?;
    let sol = model::odd_solution(&params, n as f64, PI, &SolveOptions::tight())?;
    let mut sup = 0.0f64;
    for i in 0..latitudes {
        let theta = PI * i as f64 / (latitudes - 1) as f64;
        let u = theta.cos();
        let t = sol.inverse(u).ok_or_else(|| Error::IntegrationFailure {
            t: f64::NAN,
            reason: format!("no preimage of u = {u}"),
        })?;
        let (_, wp) = sol.eval(t).expect("preimage lies in the interval");
        sup = sup.max((wp - (1.0 - u * u).max(0.0).sqrt()).abs());
    }
    Ok(GradientReport {
        n,
        latitudes,
        sup_discrepancy: sup,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda1: f64,
    pub delta: f64,
    pub lambda_bar: f64,
    #[serde(rename = "N")]
    pub big_n: f64,
    #[serde(rename = "K_bar")]
    pub k_bar: f64,
    /// `d_{N,K̄,λ̄}`.
    pub d_perturbed: f64,
    /// `d_{N,K̄,λ̄}/√(1+δ)`.
    pub d_target: f64,
    pub c1: f64,
    pub c2: f64,
    /// `1/((1+2δ) C₁ C₂)`.
    pub alpha: f64,
    /// `λ₁(n, K, d_target)`.
    pub model_lambda1: f64,
    /// `C₁C₂λ̄ - λ₁(n, K, d_target)`.
    pub slack: f64,
    pub pass: bool,
}

/// `d` as a function of `λ`, extended by `+inf` where no symmetric
/// interval exists (below `N K` on the Tan branch).
fn length_at(params: &ModelParams, lambda: f64) -> Result<f64> {
    match symmetric_interval_length(params, lambda) {
        Ok(d) => Ok(d),
        Err(Error::Domain(_)) if lambda > 0.0 => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Solves `d_{params}(c λ) = target` for `c`, using that `d` decreases in `λ`.
fn solve_scale(params: &ModelParams, lambda: f64, target: f64) -> Result<f64> {
    let above = |c: f64| -> Result<bool> { Ok(length_at(params, c * lambda)? > target) };
    let (mut lo, mut hi) = (1.0, 1.0);
    if above(1.0)? {
        while above(hi)? {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::BracketFailure { lo, hi });
            }
        }
        lo = 0.5 * hi;
        if hi == 1.0 {
            lo = 1.0;
        }
    } else {
        while !above(lo)? {
            lo *= 0.5;
            if lo < 1e-12 {
                return Err(Error::BracketFailure { lo, hi });
            }
        }
        hi = 2.0 * lo;
    }
    if length_at(params, lo * lambda)? == target {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * hi {
            break;
        }
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rescaling chain from the perturbed model `(N, K̄, λ̄)` back to the
/// unperturbed `(n, K)` at the shrunken diameter, with `σ = 0`.
pub fn diameter_chain_check(n: f64, k: f64, lambda1: f64, delta: f64) -> Result<ChainReport> {
    let lambda_bar = choose_lambda_bar(lambda1, delta)?;
    let (big_n, k_bar) = if delta == 0.0 {
        (n, k)
    } else {
        let big_n = choose_n(n, delta)?;
        (big_n, choose_k_bar(k, n, big_n, delta, 0.0, None)?)
    };
    let perturbed = ModelParams::symmetric(big_n, k_bar)?;
    let base = ModelParams::symmetric(n, k)?;
    let d_perturbed = symmetric_interval_length(&perturbed, lambda_bar)?;
    let d_target = d_perturbed / (1.0 + delta).sqrt();
    if k > 0.0 && d_target > PI / k.sqrt() {
        return Err(Error::domain(format!(
            "target diameter {d_target} exceeds π/√K = {}",
            PI / k.sqrt()
        )));
    }

    let (c1, c2) = if delta == 0.0 {
        (1.0, 1.0)
    } else {
        let c1 = solve_scale(&perturbed, lambda_bar, d_target)?;
        let d1 = length_at(&perturbed, c1 * lambda_bar)?;
        let c2 = solve_scale(&base, c1 * lambda_bar, d1)?;
        (c1, c2)
    };
    let model = lambda1_model(n, k, d_target)?;
    let chain = c1 * c2 * lambda_bar;
    let slack = chain - model;
    Ok(ChainReport {
        n,
        k,
        lambda1,
        delta,
        lambda_bar,
        big_n,
        k_bar,
        d_perturbed,
        d_target,
        c1,
        c2,
        alpha: 1.0 / ((1.0 + 2.0 * delta) * c1 * c2),
        model_lambda1: model,
        slack,
        pass: slack >= -1e-8 * model,
    })
}
