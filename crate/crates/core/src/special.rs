//! Gauss hypergeometric function on `[0, 1]`.

use statrs::function::beta::ln_beta;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::tanh_sinh;

const MAX_TERMS: usize = 10_000;
const REL_TOL: f64 = 1e-15;
/// Above this argument the plain series is replaced by an accelerated form.
const NEAR_ONE: f64 = 0.9;

/// `2F1(p, q; r; z)` for real parameters and `z` in `[0, 1]`.
///
/// Power series for `z <= 0.9`, Gauss summation at `z = 1`. In between, the
/// `1 - z` connection formula when `r - p - q` is not within `1e-3` of an
/// integer; failing that the Euler integral (tanh-sinh quadrature) when
/// `0 < p < r` or `0 < q < r`, or the Euler transformation
/// `(1 - z)^{r-p-q} 2F1(r-p, r-q; r; z)` when it shortens the series.
pub fn hyp2f1(p: f64, q: f64, r: f64, z: f64) -> Result<f64> {
    if !(p.is_finite() && q.is_finite() && r.is_finite() && z.is_finite()) {
        return Err(invalid("hyp2f1 arguments must be finite"));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(invalid(format!("hyp2f1 argument {z} outside [0, 1]")));
    }
    if r <= 0.0 && r == r.round() {
        return Err(invalid(format!("hyp2f1 parameter r = {r} is a non-positive integer")));
    }
    if z == 0.0 || p == 0.0 || q == 0.0 {
        return Ok(1.0);
    }
    if z == 1.0 {
        return gauss_sum(p, q, r);
    }
    if z <= NEAR_ONE || terminates(p) || terminates(q) {
        return series(p, q, r, z);
    }
    let s = r - p - q;
    if (s - s.round()).abs() > 1e-3 {
        return connection(p, q, r, z);
    }
    if 0.0 < p && p < r {
        return euler_integral(q, p, r, z);
    }
    if 0.0 < q && q < r {
        return euler_integral(p, q, r, z);
    }
    if s < 0.0 {
        return Ok((1.0 - z).powf(s) * series(r - p, r - q, r, z)?);
    }
    series(p, q, r, z)
}

fn terminates(a: f64) -> bool {
    a < 0.0 && a == a.round()
}

fn inv_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Continuation to `1 - z` for non-integer `s = r - p - q`.
fn connection(p: f64, q: f64, r: f64, z: f64) -> Result<f64> {
    let s = r - p - q;
    let w = 1.0 - z;
    let gr = gamma(r);
    let a = gr * gamma(s) * inv_gamma(r - p) * inv_gamma(r - q);
    let b = gr * gamma(-s) * inv_gamma(p) * inv_gamma(q);
    let first = if a == 0.0 { 0.0 } else { a * series(p, q, 1.0 - s, w)? };
    let second = if b == 0.0 {
        0.0
    } else {
        b * w.powf(s) * series(r - p, r - q, s + 1.0, w)?
    };
    Ok(first + second)
}

/// Gauss summation `Γ(r)Γ(r-p-q) / (Γ(r-p)Γ(r-q))`.
pub fn gauss_sum(p: f64, q: f64, r: f64) -> Result<f64> {
    let excess = r - p - q;
    if excess <= 0.0 {
        return Err(Error::GaussDivergence { excess });
    }
    Ok(gamma(r) * gamma(excess) * inv_gamma(r - p) * inv_gamma(r - q))
}

fn series(p: f64, q: f64, r: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (p + kf) * (q + kf) / ((r + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // bound the geometric tail once the ratio has settled below one
        let rho = ratio.abs();
        if rho < 1.0 && term.abs() / (1.0 - rho) < REL_TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNonConvergence {
        terms: MAX_TERMS,
        partial_sum: sum,
        last_term: term,
    })
}

/// `B(β, r-β)^{-1} ∫ t^{β-1} (1-t)^{r-β-1} (1 - z t)^{-α} dt` with `0 < β < r`.
fn euler_integral(alpha: f64, beta: f64, r: f64, z: f64) -> Result<f64> {
    let one_minus_z = 1.0 - z;
    let integral = tanh_sinh(0.0, 1.0, 1e-15, |t, ta, tb| {
        let base = tb + t * one_minus_z;
        ta.powf(beta - 1.0) * tb.powf(r - beta - 1.0) * base.powf(-alpha)
    })?;
    Ok(integral * (-ln_beta(beta, r - beta)).exp())
}
