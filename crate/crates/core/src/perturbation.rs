//! Perturbed parameters `(λ̄, N, α, β, K̄)` for a defect size `δ`, and the
//! coefficient conditions they are built to satisfy.

use serde::{Deserialize, Serialize};

use crate::bounds::Flag;
use crate::error::{Error, Result};

/// Multiplicative margin placing `N` strictly above its critical value.
pub const N_MARGIN: f64 = 1e-6;

/// `λ̄ = (1 + 2δ) λ₁`.
pub fn choose_lambda_bar(lambda1: f64, delta: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(Error::domain(format!("lambda1 = {lambda1} must be positive")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta = {delta} must be nonnegative")));
    }
    Ok((1.0 + 2.0 * delta) * lambda1)
}

/// `r = (1-δ)/(1+2δ) · (n+1)/(n-1)`; feasibility of `δ` means `r > 1`.
fn ratio(n: f64, delta: f64) -> f64 {
    (1.0 - delta) / (1.0 + 2.0 * delta) * (n + 1.0) / (n - 1.0)
}

fn check_n_delta(n: f64, delta: f64) -> Result<()> {
    if !(n >= 3.0 && n.is_finite()) {
        return Err(Error::domain(format!("dimension n = {n} must be at least 3")));
    }
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("delta = {delta} must be nonnegative")));
    }
    if ratio(n, delta) <= 1.0 {
        return Err(Error::InfeasibleDelta { n, delta });
    }
    Ok(())
}

/// Critical dimension `N* = (r+1)/(r-1)` at which
/// `(N+1)/(N-1) · (n-1)/(n+1) = (1-δ)/(1+2δ)`.
pub fn critical_n(n: f64, delta: f64) -> Result<f64> {
    check_n_delta(n, delta)?;
    let r = ratio(n, delta);
    Ok((r + 1.0) / (r - 1.0))
}

/// `N = N*(1 + margin)`.
pub fn choose_n_with_margin(n: f64, delta: f64, margin: f64) -> Result<f64> {
    Ok(critical_n(n, delta)? * (1.0 + margin))
}

/// The smallest admissible `N` up to [`N_MARGIN`].
pub fn choose_n(n: f64, delta: f64) -> Result<f64> {
    let big_n = choose_n_with_margin(n, delta, N_MARGIN)?;
    assert!(big_n > n, "chosen N = {big_n} does not exceed n = {n}");
    Ok(big_n)
}

/// Whether `(N+1)/(N-1) · (n-1)/(n+1) < (1-δ)/(1+2δ)` holds strictly.
pub fn n_condition(n: f64, big_n: f64, delta: f64) -> bool {
    (big_n + 1.0) / (big_n - 1.0) * (n - 1.0) / (n + 1.0) < (1.0 - delta) / (1.0 + 2.0 * delta)
}

/// Smaller root of `2(1-α)y² - (n+1)y + (n-1)`, i.e.
/// `(n+1 - √((n-3)² + 8α(n-1))) / (4(1-α))`.
pub fn alpha_threshold(n: f64, alpha: f64) -> f64 {
    let disc = (n - 3.0).powi(2) + 8.0 * alpha * (n - 1.0);
    let num = n + 1.0 - disc.sqrt();
    if 1.0 - alpha < 1e-12 {
        return (n - 1.0) / (n + 1.0);
    }
    num / (4.0 * (1.0 - alpha))
}

/// `(α, β)`: half of the supremal values allowed by
/// `(1+δ)/(1+2δ) < min{alpha_threshold(n, α), 1 - 2nβ/(n+1)}`.
pub fn choose_alpha_beta(n: f64, delta: f64) -> Result<(f64, f64)> {
    check_n_delta(n, delta)?;
    if !(delta > 0.0) {
        return Err(Error::domain("choose_alpha_beta needs delta > 0"));
    }
    let target = (1.0 + delta) / (1.0 + 2.0 * delta);
    let beta = (n + 1.0) / (4.0 * n) * delta / (1.0 + 2.0 * delta);

    // alpha_threshold decreases from 1 at α = 0 to (n-1)/(n+1) as α → 1.
    let (mut lo, mut hi) = (0.0, 1.0);
    if alpha_threshold(n, hi) >= target {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if alpha_threshold(n, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let alpha = 0.5 * lo;
    if !(alpha > 0.0) {
        return Err(Error::InfeasibleDelta { n, delta });
    }
    assert!(target < alpha_threshold(n, alpha));
    assert!(target < 1.0 - 2.0 * n * beta / (n + 1.0));
    Ok((alpha, beta))
}

/// Aubry-type cap on `K̄` for `K > 0`: constant `C(n, p)` and curvature
/// smallness `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AubryCap {
    pub c: f64,
    pub eps: f64,
}

/// `K̄` for the sign of `K`:
/// `(1-δ)K(n-1)/(N-1) - (1+δ)σ/(N-1)` if `K ≥ 0`,
/// `(1+δ)K(n-1)/(N-1) - (1+δ)σ/(N-1)` if `K < 0`,
/// optionally capped by `nK(1 - Cε)/N` for `K > 0`.
pub fn choose_k_bar(
    k: f64,
    n: f64,
    big_n: f64,
    delta: f64,
    sigma: f64,
    aubry: Option<AubryCap>,
) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!("sigma = {sigma} must be nonnegative")));
    }
    if !(big_n > 1.0) {
        return Err(Error::domain(format!("N = {big_n} must exceed 1")));
    }
    let m = big_n - 1.0;
    let shift = (1.0 + delta) * sigma / m;
    let mut k_bar = if k >= 0.0 {
        (1.0 - delta) * k * (n - 1.0) / m - shift
    } else {
        (1.0 + delta) * k * (n - 1.0) / m - shift
    };
    if let (Some(cap), true) = (aubry, k > 0.0) {
        k_bar = k_bar.min(n * k * (1.0 - cap.c * cap.eps) / big_n);
    }
    if delta > 0.0 || sigma > 0.0 {
        // The Ricci-side budget is what the construction consumes: for K < 0
        // with N > n the curvature itself can exceed K.
        assert!(
            m * k_bar < (n - 1.0) * k || k == 0.0 && sigma == 0.0,
            "(N-1)K̄ = {} is not below (n-1)K = {}",
            m * k_bar,
            (n - 1.0) * k
        );
    }
    Ok(k_bar)
}

/// Parameter set produced by the choosers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedParams {
    pub n: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda1: f64,
    pub delta: f64,
    pub lambda_bar: f64,
    #[serde(rename = "N")]
    pub big_n: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "K_bar")]
    pub k_bar: f64,
    pub sigma: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl PerturbedParams {
    /// Runs all choosers for `δ > 0`.
    pub fn choose(
        n: f64,
        delta: f64,
        lambda1: f64,
        k: f64,
        sigma: f64,
        aubry: Option<AubryCap>,
    ) -> Result<Self> {
        let lambda_bar = choose_lambda_bar(lambda1, delta)?;
        let big_n = choose_n(n, delta)?;
        let (alpha, beta) = choose_alpha_beta(n, delta)?;
        let k_bar = choose_k_bar(k, n, big_n, delta, sigma, aubry)?;
        Ok(Self {
            n,
            k,
            lambda1,
            delta,
            lambda_bar,
            big_n,
            alpha,
            beta,
            k_bar,
            sigma,
            y_lo: (1.0 - delta) / (1.0 + 2.0 * delta),
            y_hi: (1.0 + delta) / (1.0 + 2.0 * delta),
        })
    }

    /// `n` evenly spaced interior points of the open y-range.
    pub fn y_grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        (1..=n).map(move |i| self.y_lo + (self.y_hi - self.y_lo) * i as f64 / (n + 1) as f64)
    }
}

/// Values of the three coefficient conditions at one `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    pub y: f64,
    /// `2(1-α)y² - (n+1)y + (n-1)`.
    pub cond1: f64,
    /// `1 - 2nβ/(n+1) - y`.
    pub cond2: f64,
    /// `y(n+1)/(n-1) - (N+1)/(N-1)`.
    pub cond3: f64,
    pub in_y_range: bool,
}

impl Conditions {
    pub fn flags(&self) -> Vec<Flag> {
        vec![
            Flag::new("cond1", self.cond1 >= 0.0),
            Flag::new("cond2", self.cond2 >= 0.0),
            Flag::new("cond3", self.cond3 >= 0.0),
            Flag::new("y_range", self.in_y_range),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.cond1 >= 0.0 && self.cond2 >= 0.0 && self.cond3 >= 0.0 && self.in_y_range
    }
}

pub fn verify_conditions(pp: &PerturbedParams, n: f64, y: f64) -> Conditions {
    Conditions {
        y,
        cond1: 2.0 * (1.0 - pp.alpha) * y * y - (n + 1.0) * y + (n - 1.0),
        cond2: 1.0 - 2.0 * n * pp.beta / (n + 1.0) - y,
        cond3: y * (n + 1.0) / (n - 1.0) - (pp.big_n + 1.0) / (pp.big_n - 1.0),
        in_y_range: pp.y_lo < y && y < pp.y_hi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermThree {
    /// `(n-1)K - (N-1)K̄/J - σ`, the sufficient part of the chain.
    pub value: f64,
    /// The full `(n-1)K - (N-1)K̄/J - σ + λ̄/J - λ₁` with `λ̄ = (1+2δ)λ₁`.
    pub full: f64,
    pub pass: bool,
}

/// Evaluates the curvature term left after the maximum principle step for
/// a value `J ∈ [1-δ, 1+δ]` of the auxiliary function.
#[allow(clippy::too_many_arguments)]
pub fn check_term_iii(
    n: f64,
    k: f64,
    big_n: f64,
    k_bar: f64,
    sigma: f64,
    delta: f64,
    lambda1: f64,
    j: f64,
) -> Result<TermThree> {
    let tol = 1e-12;
    if !(j >= (1.0 - delta) * (1.0 - tol) && j <= (1.0 + delta) * (1.0 + tol)) {
        return Err(Error::domain(format!("J = {j} lies outside [1-δ, 1+δ]")));
    }
    let value = (n - 1.0) * k - (big_n - 1.0) * k_bar / j - sigma;
    let lambda_bar = (1.0 + 2.0 * delta) * lambda1;
    let slack = tol * ((n - 1.0) * k).abs().max(1.0);
    Ok(TermThree {
        value,
        full: value + lambda_bar / j - lambda1,
        pass: value >= -slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_bar_examples() {
        assert_relative_eq!(choose_lambda_bar(1.0, 0.1).unwrap(), 1.2);
        assert_eq!(choose_lambda_bar(3.0, 0.0).unwrap(), 3.0);
        assert_relative_eq!(choose_lambda_bar(2.5, 0.05).unwrap(), 2.75);
        assert!(choose_lambda_bar(0.0, 0.1).is_err());
    }

    #[test]
    fn n_examples() {
        let r = 0.99 / 1.02 * 2.0;
        let star = (r + 1.0) / (r - 1.0);
        assert_relative_eq!(critical_n(3.0, 0.01).unwrap(), star, max_relative = 1e-14);
        assert!((star - 3.125).abs() < 1e-12);
        let big_n = choose_n(3.0, 0.01).unwrap();
        assert!(big_n > star && n_condition(3.0, big_n, 0.01));
        assert!(matches!(
            choose_n(3.0, 0.3),
            Err(Error::InfeasibleDelta { .. })
        ));
        for n in [3.0, 4.0, 7.0] {
            assert_relative_eq!(critical_n(n, 0.0).unwrap(), n, max_relative = 1e-14);
        }
    }

    #[test]
    fn n_margin_is_minimal() {
        for n in [3.0, 4.0, 5.0] {
            for delta in [0.1, 0.01, 0.001] {
                assert!(n_condition(n, choose_n_with_margin(n, delta, N_MARGIN).unwrap(), delta));
                assert!(n_condition(n, choose_n_with_margin(n, delta, N_MARGIN / 10.0).unwrap(), delta));
                assert!(!n_condition(n, choose_n_with_margin(n, delta, -N_MARGIN).unwrap(), delta));
            }
        }
    }

    #[test]
    fn alpha_beta_examples() {
        let (alpha, beta) = choose_alpha_beta(3.0, 0.1).unwrap();
        assert_relative_eq!(beta, 1.0 / 36.0, max_relative = 1e-14);
        // For n = 3 the threshold is 1/(1+√α), so the supremum is (δ/(1+δ))².
        assert_relative_eq!(alpha, 0.5 * (0.1f64 / 1.1).powi(2), max_relative = 1e-12);
        for n in [3.0, 4.0, 10.0] {
            assert_eq!(alpha_threshold(n, 0.0), 1.0);
        }
        let (alpha, beta) = choose_alpha_beta(3.0, 0.01).unwrap();
        assert!(alpha > 0.0 && beta > 0.0);
    }

    #[test]
    fn k_bar_examples() {
        assert_eq!(choose_k_bar(0.0, 3.0, 3.2, 0.1, 0.0, None).unwrap(), 0.0);
        assert_relative_eq!(
            choose_k_bar(1.0, 3.0, 3.2, 0.1, 0.0, None).unwrap(),
            0.9 * 2.0 / 2.2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            choose_k_bar(-1.0, 3.0, 3.2, 0.1, 0.04, None).unwrap(),
            (1.1 * -2.0 - 1.1 * 0.04) / 2.2,
            max_relative = 1e-14
        );
        let capped = choose_k_bar(1.0, 3.0, 3.2, 0.1, 0.0, Some(AubryCap { c: 1.0, eps: 0.5 }))
            .unwrap();
        assert_relative_eq!(capped, 3.0 * 0.5 / 3.2, max_relative = 1e-14);
    }

    #[test]
    fn chosen_parameters_pass_conditions() {
        for n in [3.0, 4.0, 5.0] {
            for delta in [0.1, 0.01, 0.001] {
                for k in [-1.0, 0.0, 1.0] {
                    let pp = PerturbedParams::choose(n, delta, 2.0, k, 0.0, None).unwrap();
                    for y in pp.y_grid(1000) {
                        let c = verify_conditions(&pp, n, y);
                        assert!(c.all_pass(), "{pp:?} {c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn condition_examples() {
        let pp = PerturbedParams {
            n: 3.0,
            k: 0.0,
            lambda1: 1.0,
            delta: 0.0,
            lambda_bar: 1.0,
            big_n: 3.0,
            alpha: 0.0,
            beta: 0.0,
            k_bar: 0.0,
            sigma: 0.0,
            y_lo: 1.0,
            y_hi: 1.0,
        };
        for n in [3.0, 5.0, 8.0] {
            assert_eq!(verify_conditions(&pp, n, 1.0).cond1, 0.0);
        }
        // 2(0.5625) - 3(0.75) + 1
        let c = verify_conditions(&pp, 2.0, 0.75);
        assert_relative_eq!(c.cond1, -0.125, max_relative = 1e-14);
        assert!(!c.flags()[0].pass);
    }

    #[test]
    fn term_iii_examples() {
        let (n, delta, sigma) = (3.0, 0.1, 0.02);
        let big_n = choose_n(n, delta).unwrap();
        let kp = choose_k_bar(1.0, n, big_n, delta, sigma, None).unwrap();
        let t = check_term_iii(n, 1.0, big_n, kp, sigma, delta, 3.0, 1.0 - delta).unwrap();
        assert!(t.pass && t.value >= 0.0 && t.full > 0.0);
        let k0 = choose_k_bar(1.0, n, big_n, delta, 0.0, None).unwrap();
        let t0 = check_term_iii(n, 1.0, big_n, k0, 0.0, delta, 3.0, 1.0 - delta).unwrap();
        assert!(t0.pass && t0.value.abs() < 1e-12);
        let kn = choose_k_bar(-1.0, n, big_n, delta, sigma, None).unwrap();
        assert!(check_term_iii(n, -1.0, big_n, kn, sigma, delta, 1.0, 1.0 + delta).unwrap().pass);
        for j in [0.9, 0.95, 1.0, 1.05, 1.1] {
            assert!(check_term_iii(n, 1.0, big_n, kp, sigma, delta, 3.0, j).unwrap().pass);
            assert!(check_term_iii(n, -1.0, big_n, kn, sigma, delta, 1.0, j).unwrap().pass);
        }

        assert!(!check_term_iii(3.0, 1.0, 3.0, 1.0, 0.1, 0.0, 3.0, 1.0).unwrap().pass);
        let k_bar = choose_k_bar(1.0, 3.0, 3.5, 0.0, 0.0, None).unwrap();
        assert!(check_term_iii(3.0, 1.0, 3.5, k_bar, 0.0, 0.0, 3.0, 1.0).unwrap().pass);
        assert!(check_term_iii(3.0, 1.0, 3.5, k_bar, 0.0, 0.1, 3.0, 1.5).is_err());
    }
}
