//! Auxiliary function `J` and constant `σ` on one-dimensional surrogate
//! manifolds (a circle, or an interval with Neumann ends).
//!
//! `J` solves `ΔJ - τ|∇J|²/J - 2Jρ_K = -σJ`. The substitution
//! `J = W^{-1/(τ-1)}` turns this into the linear eigenproblem
//! `ΔW + VW = σ̃W` with `V = 2(τ-1)ρ_K` and `σ̃ = (τ-1)σ`, whose principal
//! (largest) eigenvalue has a positive eigenfunction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// Periodic, sampled at `t_i = i L / M`, `i = 0..M`.
    Circle { length: f64 },
    /// Neumann ends, sampled at `t_i = i L / (M-1)`, endpoints included.
    Interval { length: f64 },
}

impl Geometry {
    pub fn length(&self) -> f64 {
        match *self {
            Geometry::Circle { length } | Geometry::Interval { length } => length,
        }
    }

    fn spacing(&self, m: usize) -> f64 {
        match *self {
            Geometry::Circle { length } => length / m as f64,
            Geometry::Interval { length } => length / (m - 1) as f64,
        }
    }
}

/// Lowest Ricci eigenvalue `ρ` sampled on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    geometry: Geometry,
    rho: Vec<f64>,
    n_ambient: usize,
}

impl CurvatureProfile {
    pub fn new(geometry: Geometry, rho: Vec<f64>, n_ambient: usize) -> Result<Self> {
        let length = geometry.length();
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::domain(format!("length L = {length} must be positive")));
        }
        if rho.len() < MIN_POINTS {
            return Err(Error::MeshTooCoarse {
                points: rho.len(),
                min: MIN_POINTS,
            });
        }
        if let Some(i) = rho.iter().position(|r| !r.is_finite()) {
            return Err(Error::domain(format!("rho is not finite at sample {i}")));
        }
        if n_ambient < 3 {
            return Err(Error::domain(format!("ambient dimension {n_ambient} must be at least 3")));
        }
        Ok(Self {
            geometry,
            rho,
            n_ambient,
        })
    }

    /// Samples `f` on the mesh of `m` points.
    pub fn from_fn(
        geometry: Geometry,
        m: usize,
        n_ambient: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if m < MIN_POINTS {
            return Err(Error::MeshTooCoarse {
                points: m,
                min: MIN_POINTS,
            });
        }
        let h = geometry.spacing(m);
        Self::new(geometry, (0..m).map(|i| f(i as f64 * h)).collect(), n_ambient)
    }

    /// Reads `t,rho` rows. The `t` column must start at 0 and be uniform
    /// with the spacing implied by the geometry.
    pub fn from_csv(text: &str, geometry: Geometry, n_ambient: usize) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.replace(' ', "").eq_ignore_ascii_case("t,rho") => {}
            _ => return Err(Error::domain("profile must start with the header `t,rho`")),
        }
        let mut t = Vec::new();
        let mut rho = Vec::new();
        for (i, line) in lines {
            let mut cols = line.split(',').map(str::trim);
            let parse = |c: Option<&str>| -> Result<f64> {
                c.and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::domain(format!("line {}: expected `t,rho`", i + 1)))
            };
            t.push(parse(cols.next())?);
            rho.push(parse(cols.next())?);
            if cols.next().is_some() {
                return Err(Error::domain(format!("line {}: too many columns", i + 1)));
            }
        }
        if t.len() < MIN_POINTS {
            return Err(Error::MeshTooCoarse {
                points: t.len(),
                min: MIN_POINTS,
            });
        }
        let h = geometry.spacing(t.len());
        for (i, ti) in t.iter().enumerate() {
            if (ti - i as f64 * h).abs() > 1e-9 * geometry.length() {
                return Err(Error::domain(format!(
                    "sample {i}: t = {ti} is off the uniform mesh with spacing {h}"
                )));
            }
        }
        Self::new(geometry, rho, n_ambient)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn n_ambient(&self) -> usize {
        self.n_ambient
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn spacing(&self) -> f64 {
        self.geometry.spacing(self.rho.len())
    }

    pub fn mesh(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len()).map(|i| i as f64 * h).collect()
    }

    /// Quadrature weights: uniform on the circle, trapezoid on the interval.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let m = self.len();
        let mut w = vec![h; m];
        if let Geometry::Interval { .. } = self.geometry {
            w[0] = 0.5 * h;
            w[m - 1] = 0.5 * h;
        }
        w
    }

    fn mean(&self, f: &[f64]) -> f64 {
        let w = self.weights();
        f.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>()
    }
}

/// `max{(n-1)K - ρ, 0}` pointwise.
pub fn rho_k(profile: &CurvatureProfile, k: f64) -> Vec<f64> {
    let level = (profile.n_ambient as f64 - 1.0) * k;
    profile.rho.iter().map(|r| (level - r).max(0.0)).collect()
}

/// `(mean of ρ_K^p)^{1/p}`.
pub fn k_bar(profile: &CurvatureProfile, k: f64, p: f64) -> Result<f64> {
    let n = profile.n_ambient as f64;
    if !(p > n / 2.0) {
        return Err(Error::domain(format!("p = {p} must exceed n/2 = {}", n / 2.0)));
    }
    let pow: Vec<f64> = rho_k(profile, k).iter().map(|r| r.powf(p)).collect();
    Ok(profile.mean(&pow).powf(1.0 / p))
}

/// `(W_{i-1} - 2W_i + W_{i+1})/h²` with periodic or reflected ends.
fn laplacian(profile: &CurvatureProfile, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let h2 = profile.spacing().powi(2);
    let periodic = matches!(profile.geometry, Geometry::Circle { .. });
    (0..m)
        .map(|i| {
            let (l, r) = if periodic {
                (f[(i + m - 1) % m], f[(i + 1) % m])
            } else if i == 0 {
                (f[1], f[1])
            } else if i == m - 1 {
                (f[m - 2], f[m - 2])
            } else {
                (f[i - 1], f[i + 1])
            };
            (l - 2.0 * f[i] + r) / h2
        })
        .collect()
}

fn gradient(profile: &CurvatureProfile, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let h = profile.spacing();
    let periodic = matches!(profile.geometry, Geometry::Circle { .. });
    (0..m)
        .map(|i| {
            if periodic {
                (f[(i + 1) % m] - f[(i + m - 1) % m]) / (2.0 * h)
            } else if i == 0 || i == m - 1 {
                0.0
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Solves `(Δ_h + diag(v) - s) x = rhs`, a strictly diagonally dominant
/// system when `s > max v`. Periodic corners are handled by
/// Sherman–Morrison on top of the Thomas algorithm.
fn shifted_solve(profile: &CurvatureProfile, v: &[f64], s: f64, rhs: &[f64]) -> Vec<f64> {
    let m = v.len();
    let h2 = profile.spacing().powi(2);
    let diag: Vec<f64> = v.iter().map(|vi| -2.0 / h2 + vi - s).collect();
    let mut sub = vec![1.0 / h2; m];
    let mut sup = vec![1.0 / h2; m];
    match profile.geometry {
        Geometry::Interval { .. } => {
            sup[0] = 2.0 / h2;
            sub[m - 1] = 2.0 / h2;
            thomas(&sub, &diag, &sup, rhs)
        }
        Geometry::Circle { .. } => {
            // A = T + u vᵀ with u = (γ, 0, …, 0, c), v = (1, 0, …, 0, a/γ).
            let corner = 1.0 / h2;
            let gamma = -diag[0];
            let mut d = diag.clone();
            d[0] -= gamma;
            d[m - 1] -= corner * corner / gamma;
            let y = thomas(&sub, &d, &sup, rhs);
            let mut u = vec![0.0; m];
            u[0] = gamma;
            u[m - 1] = corner;
            let q = thomas(&sub, &d, &sup, &u);
            let vy = y[0] + corner / gamma * y[m - 1];
            let vq = q[0] + corner / gamma * q[m - 1];
            let f = vy / (1.0 + vq);
            y.iter().zip(&q).map(|(yi, qi)| yi - f * qi).collect()
        }
    }
}

/// Tridiagonal solve; `sub[i]` couples row `i` to `i-1`, `sup[i]` to `i+1`.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < m { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn apply(profile: &CurvatureProfile, v: &[f64], f: &[f64]) -> Vec<f64> {
    laplacian(profile, f)
        .into_iter()
        .zip(v.iter().zip(f))
        .map(|(l, (vi, fi))| l + vi * fi)
        .collect()
}

/// Principal eigenpair of `Δ_h + V` by inverse iteration with a shift
/// above the spectrum, starting from the constant function.
fn principal_eigenpair(profile: &CurvatureProfile, v: &[f64]) -> Result<(f64, Vec<f64>)> {
    let w = profile.weights();
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&w).map(|((x, y), q)| x * y * q).sum()
    };
    let rayleigh = |f: &[f64]| dot(f, &apply(profile, v, f)) / dot(f, f);

    let mut f = vec![1.0; v.len()];
    let lam = rayleigh(&f);
    let resid = apply(profile, v, &f)
        .iter()
        .zip(&f)
        .fold(0.0f64, |m, (af, fi)| m.max((af - lam * fi).abs()));
    let v_max = v.iter().cloned().fold(0.0, f64::max);
    if resid <= 4.0 * f64::EPSILON * (v_max + 1.0) {
        return Ok((lam, f));
    }

    // The operator is Metzler, so for positive f the Collatz–Wielandt ratio
    // max (Af)_i / f_i bounds the top eigenvalue from above. Shifting just
    // above it keeps the iteration on the principal mode and makes it fast.
    let h2 = profile.spacing().powi(2);
    let floor = 64.0 * f64::EPSILON * (4.0 / h2 + v_max.abs() + 1.0);
    let mut shift = v_max + 1e-3 * (v_max + 1.0);
    let mut prev_change = f64::INFINITY;
    for _ in 0..1_000 {
        let mut g = shifted_solve(profile, v, shift, &f);
        let norm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sign = if g.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        g.iter_mut().for_each(|x| *x *= sign / norm);
        let change = g
            .iter()
            .zip(&f)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        f = g;
        let lam = rayleigh(&f);
        let af = apply(profile, v, &f);
        let upper = if f.iter().all(|x| *x > 0.0) {
            af.iter()
                .zip(&f)
                .map(|(a, x)| a / x)
                .fold(f64::NEG_INFINITY, f64::max)
        } else {
            shift
        };
        if upper - lam <= floor && (change <= 1e-13 || change >= prev_change) {
            return Ok((lam, f));
        }
        shift = shift.min(upper.max(lam) + floor.max(1e-3 * (upper - lam)));
        prev_change = change;
    }
    Err(Error::NoConvergence(
        "inverse iteration for the principal eigenpair".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JSolution {
    pub t: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    pub sigma: f64,
    pub sigma_tilde: f64,
    pub tau: f64,
    /// `sup |J - 1|`.
    pub sup_deviation: f64,
}

impl JSolution {
    /// Builds `J = W^{-1/(τ-1)}` with volume mean 1 from a positive
    /// eigenfunction `W` of `Δ + V` with eigenvalue `σ̃`.
    pub fn from_eigenpair(
        profile: &CurvatureProfile,
        w: &[f64],
        sigma_tilde: f64,
        tau: f64,
    ) -> Result<Self> {
        let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NonPositiveEigenfunction { min });
        }
        let e = -1.0 / (tau - 1.0);
        let raw: Vec<f64> = w.iter().map(|x| x.powf(e)).collect();
        let mean = profile.mean(&raw);
        let j: Vec<f64> = raw.iter().map(|x| x / mean).collect();
        let w: Vec<f64> = j.iter().map(|x| x.powf(-(tau - 1.0))).collect();
        let sup_deviation = j.iter().fold(0.0f64, |m, x| m.max((x - 1.0).abs()));
        Ok(Self {
            t: profile.mesh(),
            j,
            w,
            sigma: sigma_tilde / (tau - 1.0),
            sigma_tilde,
            tau,
            sup_deviation,
        })
    }
}

/// Principal solution of the `J` equation for the defect `ρ_K`.
pub fn solve_j(profile: &CurvatureProfile, k: f64, tau: f64) -> Result<JSolution> {
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau = {tau} must exceed 1")));
    }
    let v: Vec<f64> = rho_k(profile, k).iter().map(|r| 2.0 * (tau - 1.0) * r).collect();
    let (sigma_tilde, w) = principal_eigenpair(profile, &v)?;
    JSolution::from_eigenpair(profile, &w, sigma_tilde, tau)
}

/// Pointwise residual `ΔJ - τ|∇J|²/J - 2Jρ_K + σJ` on the mesh.
pub fn jeq_residual(profile: &CurvatureProfile, k: f64, sol: &JSolution) -> Vec<f64> {
    let lap = laplacian(profile, &sol.j);
    let grad = gradient(profile, &sol.j);
    let rk = rho_k(profile, k);
    (0..sol.j.len())
        .map(|i| {
            let j = sol.j[i];
            lap[i] - sol.tau * grad[i] * grad[i] / j - 2.0 * j * rk[i] + sol.sigma * j
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub sigma: f64,
    pub sup_deviation: f64,
    /// `0 ≤ σ ≤ 4ε`.
    pub sigma_ok: bool,
    /// `sup |J - 1| ≤ δ`.
    pub j_ok: bool,
}

pub fn check_lemma_j(
    profile: &CurvatureProfile,
    k: f64,
    tau: f64,
    delta: f64,
    eps: f64,
) -> Result<LemmaCheck> {
    let sol = solve_j(profile, k, tau)?;
    Ok(LemmaCheck {
        sigma: sol.sigma,
        sup_deviation: sol.sup_deviation,
        sigma_ok: sol.sigma >= 0.0 && sol.sigma <= 4.0 * eps,
        j_ok: sol.sup_deviation <= delta,
    })
}
