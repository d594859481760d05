//! Special functions behind the closed-form logit trajectories.
//!
//! The exponential integral is evaluated with its convergent power series
//! for `x <= 40` and with the asymptotic expansion above. At the switchover
//! the smallest asymptotic term is below `1e-16` relative, so both branches
//! agree to working precision.

use crate::error::{ensure, Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 40.0;
const MAX_SERIES_TERMS: usize = 500;
const MAX_INVERSE_ITER: usize = 200;

/// Exponential integral `Ei(x)` for `x > 0`.
pub fn ei(x: f64) -> Result<f64> {
    ensure(x > 0.0 && !x.is_nan(), "x", x, "x > 0")?;
    Ok(ei_with_log(x, x.ln()))
}

/// `Ei(x)` given both `x` and `ln x`, so callers working in log space
/// keep full precision for tiny `x`.
fn ei_with_log(x: f64, ln_x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        EULER_GAMMA + ln_x + ei_series_tail(x)
    } else {
        ei_asymptotic(x)
    }
}

/// `sum_{k>=1} x^k / (k * k!)`; every term is positive so there is no
/// cancellation.
fn ei_series_tail(x: f64) -> f64 {
    let mut term = 1.0; // x^k / k!
    let mut sum = 0.0;
    for k in 1..=MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib <= f64::EPSILON * 0.25 * sum {
            break;
        }
    }
    sum
}

/// `e^x / x * sum_k k! / x^k`, truncated at the smallest term.
fn ei_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=MAX_SERIES_TERMS {
        let next = term * k as f64 / x;
        if next >= term || next <= f64::EPSILON * 0.25 * sum {
            break;
        }
        term = next;
        sum += term;
    }
    x.exp() / x * sum
}

/// `log(u) + Ei(u)` for `u > 0`. Strictly increasing, maps `(0, inf)` onto
/// the whole real line.
pub fn log_plus_ei(u: f64) -> Result<f64> {
    ensure(u > 0.0 && !u.is_nan(), "u", u, "u > 0")?;
    Ok(log_plus_ei_of_log(u.ln()))
}

/// `log(u) + Ei(u)` evaluated from `s = ln u`.
fn log_plus_ei_of_log(s: f64) -> f64 {
    s + ei_with_log(s.exp(), s)
}

/// Inverse of [`log_plus_ei`]: the unique `u > 0` with `log(u) + Ei(u) = v`.
///
/// Newton iteration runs on `s = ln u`, where the derivative is `1 + e^u`
/// and never small. A Newton step is taken only when it stays inside a
/// sign-change bracket and shrinks fast enough; otherwise the bracket is
/// bisected.
pub fn inverse_log_plus_ei(v: f64) -> Result<f64> {
    ensure(v.is_finite(), "v", v, "a finite value")?;
    let g = |s: f64| log_plus_ei_of_log(s) - v;

    // log+Ei(u) < 2 ln u + gamma + 1.32 u for u <= 1, and log+Ei(u) > u for u >= 1.
    let mut hi = v.max(1.0).ln();
    let mut lo = ((v - EULER_GAMMA - 2.0) / 2.0).min(hi - 1.0);
    let mut width = 1.0;
    while g(lo) >= 0.0 {
        lo -= width;
        width *= 2.0;
    }
    width = 1.0;
    while g(hi) <= 0.0 {
        hi += width;
        width *= 2.0;
    }

    let tol = 4.0 * f64::EPSILON * v.abs().max(1.0);
    let mut s = 0.5 * (lo + hi);
    let mut step_old = hi - lo;
    let mut step = step_old;
    for _ in 0..MAX_INVERSE_ITER {
        let gs = g(s);
        if gs.abs() <= tol {
            return finish_inverse(s, v);
        }
        if gs < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let slope = 1.0 + s.exp().exp();
        let correction = gs / slope;
        // The residual cannot drop below one ulp of s times the slope.
        if correction.abs() <= 2.0 * f64::EPSILON * s.abs().max(1.0) {
            return finish_inverse(s - correction, v);
        }
        let newton = s - correction;
        // Far right of the root the function is doubly exponential and
        // Newton crawls; bisect unless the step at least halves.
        let next = if newton.is_finite() && newton > lo && newton < hi && 2.0 * correction.abs() <= step_old.abs() {
            step_old = step;
            step = correction;
            newton
        } else {
            step_old = step;
            step = 0.5 * (hi - lo);
            lo + step
        };
        if (next - s).abs() <= 2.0 * f64::EPSILON * s.abs().max(1.0) || hi - lo <= f64::EPSILON * s.abs().max(1.0)
        {
            return finish_inverse(next, v);
        }
        s = next;
    }
    Err(Error::NoConvergence {
        routine: "inverse_log_plus_ei",
        iterations: MAX_INVERSE_ITER,
    })
}

fn finish_inverse(s: f64, v: f64) -> Result<f64> {
    let u = s.exp();
    if u > 0.0 && u.is_finite() {
        Ok(u)
    } else {
        Err(Error::domain("v", v, "a value whose preimage is representable"))
    }
}

/// Logistic function `1 / (1 + e^-u)`, evaluated without overflow.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `log(p / (1 - p))` for `p` in `(0, 1)`.
pub fn sigmoid_inverse(p: f64) -> Result<f64> {
    ensure(p > 0.0 && p < 1.0, "p", p, "0 < p < 1")?;
    Ok(p.ln() - (-p).ln_1p())
}

/// Logit needed to reach confidence `1 - delta`, i.e. `log((1 - delta) / delta)`.
///
/// Computed directly from `delta` so that tiny `delta` keeps full precision.
pub fn confidence_logit(delta: f64) -> Result<f64> {
    ensure(delta > 0.0 && delta < 1.0, "delta", delta, "0 < delta < 1")?;
    Ok((-delta).ln_1p() - delta.ln())
}
