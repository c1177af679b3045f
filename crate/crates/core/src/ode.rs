//! Dormand–Prince 5(4) stepping for scalar second-order equations
//! w'' = f(t, w, w'), with quintic Hermite dense output.
//!
//! The state is `[w, w']`. Every accepted step stores a [`Node`] holding
//! `w`, `w'` and `w''` so that the trajectory can be interpolated to sixth
//! local order between nodes without keeping the Runge–Kutta stages around.

use crate::error::{Error, Result};

/// One accepted point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub w: f64,
    pub wp: f64,
    pub wpp: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Returned by the step observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = [f64; 2];

#[inline]
fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates `w'' = accel(t, w, w')` forward from `(t0, y0)` to `t_end`.
///
/// `observe` is called after every accepted step with the previous and the
/// new node and may stop the integration early. The returned vector starts
/// with the initial node and ends with the last accepted node.
pub fn integrate<F, O>(
    accel: F,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &StepperOptions,
    mut observe: O,
) -> Result<Vec<Node>>
where
    F: Fn(f64, f64, f64) -> f64,
    O: FnMut(&Node, &Node) -> Control,
{
    if !(t_end > t0) {
        return Err(Error::domain(format!(
            "integration interval [{t0}, {t_end}] is empty"
        )));
    }
    let rhs = |t: f64, y: State| -> State { [y[1], accel(t, y[0], y[1])] };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, y);
    let mut nodes = vec![Node {
        t,
        w: y[0],
        wp: y[1],
        wpp: k1[1],
    }];
    let mut h = opts.h_init.min(opts.h_max).min(t_end - t0);
    let mut steps = 0usize;

    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let last = t_end - t <= h * (1.0 + 1e-12);
        if last {
            h = t_end - t;
        }
        if h <= 1e-15 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        let k2 = rhs(t + C2 * h, axpy(y, h, &[(A21, k1)]));
        let k3 = rhs(t + C3 * h, axpy(y, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(t + C4 * h, axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(
            t + C5 * h,
            axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = rhs(
            t + h,
            axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let t_new = if last { t_end } else { t + h };
        let k7 = rhs(t_new, y_new);

        let mut err = 0.0;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / 2.0).sqrt();

        if !err.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
            h *= 0.2;
            continue;
        }

        if err <= 1.0 {
            let prev = *nodes.last().expect("nodes is never empty");
            let node = Node {
                t: t_new,
                w: y_new[0],
                wp: y_new[1],
                wpp: k7[1],
            };
            nodes.push(node);
            t = t_new;
            y = y_new;
            k1 = k7;
            if observe(&prev, &node) == Control::Stop {
                break;
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(nodes)
}

/// Quintic Hermite interpolation between two nodes; returns `(w, w')`.
pub fn hermite(n0: &Node, n1: &Node, t: f64) -> (f64, f64) {
    let h = n1.t - n0.t;
    if h == 0.0 {
        return (n0.w, n0.wp);
    }
    let s = (t - n0.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;

    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;

    let d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let d2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    let d3 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    let d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let d5 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;

    let hh = h * h;
    let w = n0.w * h0
        + h * n0.wp * h1
        + hh * n0.wpp * h2
        + n1.w * h5
        + h * n1.wp * h4
        + hh * n1.wpp * h3;
    let dw = n0.w * d0
        + h * n0.wp * d1
        + hh * n0.wpp * d2
        + n1.w * d5
        + h * n1.wp * d4
        + hh * n1.wpp * d3;
    (w, dw / h)
}

/// Bisection for a root of `f` on `[lo, hi]`, where `f(lo)` and `f(hi)`
/// have opposite signs (or one of them is zero).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let opts = StepperOptions {
            rtol: 1e-11,
            atol: 1e-11,
            ..Default::default()
        };
        let nodes = integrate(|_, w, _| -w, 0.0, [1.0, 0.0], 10.0, &opts, |_, _| {
            Control::Continue
        })
        .unwrap();
        let last = nodes.last().unwrap();
        assert!((last.t - 10.0).abs() < 1e-14);
        assert!((last.w - 10f64.cos()).abs() < 1e-9);
        assert!((last.wp + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn hermite_is_exact_for_quintics() {
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) + 0.25 * t.powi(5);
        let dp = |t: f64| -2.0 + 1.5 * t * t + 1.25 * t.powi(4);
        let ddp = |t: f64| 3.0 * t + 5.0 * t.powi(3);
        let node = |t: f64| Node {
            t,
            w: p(t),
            wp: dp(t),
            wpp: ddp(t),
        };
        let (n0, n1) = (node(0.3), node(1.7));
        for i in 0..=10 {
            let t = 0.3 + 1.4 * i as f64 / 10.0;
            let (w, wp) = hermite(&n0, &n1, t);
            assert!((w - p(t)).abs() < 1e-13);
            assert!((wp - dp(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn observer_can_stop() {
        let nodes = integrate(
            |_, w, _| -w,
            0.0,
            [1.0, 0.0],
            100.0,
            &StepperOptions::default(),
            |_, n| {
                if n.t > 1.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        let t_last = nodes.last().unwrap().t;
        assert!(t_last > 1.0 && t_last < 5.0);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let r = integrate(|_, w, _| w, 1.0, [0.0, 0.0], 1.0, &StepperOptions::default(), |_, _| {
            Control::Continue
        });
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
