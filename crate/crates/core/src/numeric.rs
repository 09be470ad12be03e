//! Small numerical helpers.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]` by bisection. Requires a sign change.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Numeric("non-finite value at bracket end".into()));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Real roots of `a x^2 + b x + c`, ascending. A double root is returned once.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
    if disc < -1e-12 * scale {
        return Vec::new();
    }
    if disc <= 1e-12 * scale {
        return vec![-b / (2.0 * a)];
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    let (r1, r2) = if q == 0.0 { (0.0, -b / a) } else { (q / a, c / q) };
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}
