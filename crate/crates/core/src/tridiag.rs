//! Sturm-sequence bisection for symmetric tridiagonal matrices.

/// Number of eigenvalues strictly below `x`, from the signs of the pivots of
/// the `LDLᵀ` factorisation of `T - xI`.
pub fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    debug_assert_eq!(off.len() + 1, diag.len());
    let scale = diag.iter().chain(off).fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
    let guard = f64::EPSILON * f64::EPSILON * scale;
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            let e = off[i - 1];
            q = diag[i] - x - e * e / q;
        }
        if q.abs() < guard {
            q = -guard;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based), bisected until the bracket
/// stops shrinking in floating point.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    assert!(k < diag.len(), "eigenvalue index out of range");
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = 1e-12 * (hi - lo).abs().max(f64::MIN_POSITIVE);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
