//! Closed-form lower bounds for the first nonzero eigenvalue and the
//! model-based bound `α λ₁(n, K, D)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::lambda1_model;
use crate::error::{Error, Result};

/// Absolute slack used by the ordering flags of [`BoundReport`].
pub const CONSISTENCY_SLACK: f64 = 1e-9;

fn check_dim(n: f64) -> Result<()> {
    if n >= 2.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("dimension n = {n} must be at least 2")))
    }
}

fn check_diameter(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("diameter D = {d} must be positive")))
    }
}

/// `nK`, the first eigenvalue of the round sphere with `Ric = (n-1)K`.
pub fn lichnerowicz(n: f64, k: f64) -> Result<f64> {
    check_dim(n)?;
    if !(k > 0.0) {
        return Err(Error::domain(format!("lichnerowicz needs K > 0, got {k}")));
    }
    Ok(n * k)
}

/// `π²/D²`.
pub fn zhong_yang(d: f64) -> Result<f64> {
    check_diameter(d)?;
    Ok(PI * PI / (d * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiZhang {
    pub value: f64,
    pub s_star: f64,
    /// The maximiser of the quadratic fell outside `(0, 1)`; `value` is then
    /// the supremum attained at the clamped endpoint.
    pub clamped: bool,
}

/// `max_{s∈(0,1)} 4(s-s²)π²/D² + s(n-1)K` with its maximiser.
pub fn shi_zhang_detail(n: f64, k: f64, d: f64) -> Result<ShiZhang> {
    check_dim(n)?;
    check_diameter(d)?;
    let a = PI * PI / (d * d);
    let raw = 0.5 + (n - 1.0) * k / (8.0 * a);
    let s = raw.clamp(0.0, 1.0);
    Ok(ShiZhang {
        value: 4.0 * (s - s * s) * a + s * (n - 1.0) * k,
        s_star: s,
        clamped: raw <= 0.0 || raw >= 1.0,
    })
}

pub fn shi_zhang(n: f64, k: f64, d: f64) -> Result<f64> {
    Ok(shi_zhang_detail(n, k, d)?.value)
}

/// `π²/D² exp(-c_n D √((n-1)|K|))` with `c_n = max(2, n-1)`, for `K < 0`.
pub fn yang(n: f64, k: f64, d: f64) -> Result<f64> {
    check_dim(n)?;
    check_diameter(d)?;
    if !(k < 0.0) {
        return Err(Error::domain(format!("yang needs K < 0, got {k}")));
    }
    let c_n = (n - 1.0).max(2.0);
    Ok(PI * PI / (d * d) * (-c_n * d * ((n - 1.0) * k.abs()).sqrt()).exp())
}

/// `nK(1 - C k̄)` floored at zero. The constant `C(n, p)` has no known
/// closed form and must be supplied.
pub fn aubry(n: f64, k: f64, p: f64, k_bar: f64, c: f64) -> Result<f64> {
    check_dim(n)?;
    if !(k > 0.0) {
        return Err(Error::domain(format!("aubry needs K > 0, got {k}")));
    }
    if !(p > n / 2.0) {
        return Err(Error::domain(format!("aubry needs p > n/2, got p = {p}")));
    }
    if !(k_bar >= 0.0) {
        return Err(Error::domain(format!("k_bar = {k_bar} must be nonnegative")));
    }
    if !(c > 0.0) {
        return Err(Error::domain(format!("aubry constant C = {c} must be positive")));
    }
    Ok((n * k * (1.0 - c * k_bar)).max(0.0))
}

/// `α λ₁(n, K, D)`.
pub fn main_bound(n: f64, k: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(n >= 3.0) {
        return Err(Error::domain(format!("main bound needs n >= 3, got {n}")));
    }
    check_alpha(alpha)?;
    Ok(alpha * lambda1_model(n, k, d)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AubryInputs {
    pub p: f64,
    pub k_bar: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub pass: bool,
}

impl Flag {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub alpha: f64,
    pub lichnerowicz: Option<f64>,
    pub zhong_yang: f64,
    pub shi_zhang: f64,
    pub shi_zhang_clamped: bool,
    pub yang: Option<f64>,
    pub aubry: Option<f64>,
    pub model_lambda1: f64,
    pub main_bound: f64,
    pub consistency: Vec<Flag>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.consistency.iter().all(|f| f.pass)
    }
}

/// Every applicable bound for one query together with ordering flags.
pub fn bound_report(
    n: f64,
    k: f64,
    d: f64,
    alpha: f64,
    aubry_inputs: Option<AubryInputs>,
) -> Result<BoundReport> {
    check_alpha(alpha)?;
    let model = lambda1_model(n, k, d)?;
    let zy = zhong_yang(d)?;
    let sz = shi_zhang_detail(n, k, d)?;
    let lich = if k > 0.0 { Some(lichnerowicz(n, k)?) } else { None };
    let yg = if k < 0.0 { Some(yang(n, k, d)?) } else { None };
    let aub = match aubry_inputs {
        Some(a) if k > 0.0 => Some(aubry(n, k, a.p, a.k_bar, a.c)?),
        Some(_) => {
            return Err(Error::domain("aubry inputs given but K <= 0"));
        }
        None => None,
    };
    let below = |v: f64| v <= model + CONSISTENCY_SLACK;

    let mut flags = vec![Flag::new("shi_zhang <= model", below(sz.value))];
    if k >= 0.0 {
        flags.push(Flag::new("zhong_yang <= model", below(zy)));
    } else {
        flags.push(Flag::new("model <= zhong_yang", model <= zy + CONSISTENCY_SLACK));
    }
    if let Some(v) = lich {
        flags.push(Flag::new("lichnerowicz <= model", below(v)));
    }
    if let Some(v) = yg {
        flags.push(Flag::new("yang <= model", below(v)));
    }
    if let Some(v) = aub {
        flags.push(Flag::new("aubry <= model", below(v)));
    }
    let main = alpha * model;
    flags.push(Flag::new("main_bound <= model", below(main)));

    Ok(BoundReport {
        n,
        k,
        d,
        alpha,
        lichnerowicz: lich,
        zhong_yang: zy,
        shi_zhang: sz.value,
        shi_zhang_clamped: sz.clamped,
        yang: yg,
        aubry: aub,
        model_lambda1: model,
        main_bound: main,
        consistency: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Maximum of the quadratic over a uniform grid of the open interval.
    fn shi_zhang_grid(n: f64, k: f64, d: f64) -> f64 {
        let m = 100_000;
        (1..m)
            .map(|i| {
                let s = i as f64 / m as f64;
                4.0 * (s - s * s) * PI * PI / (d * d) + s * (n - 1.0) * k
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn lichnerowicz_examples() {
        assert_eq!(lichnerowicz(3.0, 1.0).unwrap(), 3.0);
        assert_eq!(lichnerowicz(2.0, 4.0).unwrap(), 8.0);
        assert!(lichnerowicz(3.0, 1e-300).unwrap() < 1e-299);
        assert!(lichnerowicz(3.0, 0.0).is_err());
    }

    #[test]
    fn zhong_yang_examples() {
        assert_relative_eq!(zhong_yang(PI).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(zhong_yang(PI / 2.0).unwrap(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(zhong_yang(1.0).unwrap(), PI * PI);
        assert!(zhong_yang(0.0).is_err());
    }

    #[test]
    fn shi_zhang_examples() {
        let flat = shi_zhang_detail(3.0, 0.0, PI).unwrap();
        assert_eq!(flat.s_star, 0.5);
        assert_relative_eq!(flat.value, 1.0, max_relative = 1e-15);

        let pos = shi_zhang_detail(3.0, 1.0, PI).unwrap();
        assert_relative_eq!(pos.s_star, 0.75, max_relative = 1e-15);
        assert_relative_eq!(pos.value, 2.25, max_relative = 1e-14);
        assert!((pos.value - shi_zhang_grid(3.0, 1.0, PI)).abs() < 1e-9);

        let neg = shi_zhang(3.0, -1.0, 1.0).unwrap();
        assert!((neg - shi_zhang_grid(3.0, -1.0, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn shi_zhang_clamps_extreme_curvature() {
        let hi = shi_zhang_detail(3.0, 10.0, 3.0).unwrap();
        assert!(hi.clamped && hi.s_star == 1.0);
        assert_relative_eq!(hi.value, 20.0);
        let lo = shi_zhang_detail(3.0, -10.0, 3.0).unwrap();
        assert!(lo.clamped && lo.s_star == 0.0 && lo.value == 0.0);
    }

    #[test]
    fn yang_examples() {
        assert_relative_eq!(
            yang(3.0, -1.0, PI).unwrap(),
            (-2.0 * PI * 2f64.sqrt()).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            yang(5.0, -1.0, 1.0).unwrap(),
            PI * PI * (-8.0f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(yang(4.0, -1e-22, 2.0).unwrap(), PI * PI / 4.0, max_relative = 1e-8);
        assert!(yang(3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn aubry_examples() {
        let c = 0.37;
        assert_eq!(aubry(3.0, 1.0, 2.0, 0.0, c).unwrap(), 3.0);
        assert_relative_eq!(aubry(3.0, 1.0, 2.0, 0.5 / c, c).unwrap(), 1.5, max_relative = 1e-15);
        assert_eq!(aubry(3.0, 1.0, 2.0, 2.0 / c, c).unwrap(), 0.0);
        assert!(aubry(3.0, 0.0, 2.0, 0.0, c).is_err());
        assert!(aubry(3.0, 1.0, 1.5, 0.0, c).is_err());
    }

    #[test]
    fn shi_zhang_flat_equals_zhong_yang() {
        for d in [0.3, 1.0, PI, 7.5] {
            assert_eq!(shi_zhang(4.0, 0.0, d).unwrap(), zhong_yang(d).unwrap());
        }
    }

    #[test]
    fn shi_zhang_below_lichnerowicz_at_model_diameter() {
        for n in [2.0, 3.0, 5.0, 10.0] {
            for k in [0.25, 1.0, 4.0] {
                let d = PI / f64::sqrt(k);
                assert!(shi_zhang(n, k, d).unwrap() <= n * k + 1e-12);
            }
        }
    }

    #[test]
    fn main_bound_examples() {
        assert_relative_eq!(main_bound(3.0, 1.0, PI, 1.0).unwrap(), 3.0, max_relative = 1e-8);
        assert_relative_eq!(main_bound(3.0, 0.0, PI, 0.5).unwrap(), 0.5, max_relative = 1e-9);
        let model = lambda1_model(3.0, -1.0, 1.0).unwrap();
        assert_relative_eq!(main_bound(3.0, -1.0, 1.0, 0.9).unwrap(), 0.9 * model);
        assert!(main_bound(2.0, 0.0, 1.0, 0.5).is_err());
        assert!(main_bound(3.0, 0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn reports_for_each_curvature_sign() {
        let pos = bound_report(3.0, 1.0, PI, 1.0, None).unwrap();
        assert!(pos.all_pass(), "{pos:?}");
        assert!(pos.lichnerowicz.is_some() && pos.yang.is_none());

        let flat = bound_report(3.0, 0.0, PI, 0.5, None).unwrap();
        assert!(flat.all_pass());
        assert_relative_eq!(flat.main_bound, 0.5, max_relative = 1e-9);

        let neg = bound_report(3.0, -1.0, 1.0, 0.9, None).unwrap();
        assert!(neg.all_pass(), "{neg:?}");
        assert!(neg.yang.is_some() && neg.lichnerowicz.is_none());

        let with_aubry = bound_report(
            3.0,
            1.0,
            2.0,
            1.0,
            Some(AubryInputs {
                p: 2.0,
                k_bar: 0.1,
                c: 1.0,
            }),
        )
        .unwrap();
        assert_relative_eq!(with_aubry.aubry.unwrap(), 2.7, max_relative = 1e-15);
        assert!(with_aubry.all_pass());
    }
}
