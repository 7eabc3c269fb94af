//! Mittag-Leffler functions `E_ν(-x)` and `E_{ν,μ}(-x)` on the negative real axis.
//!
//! Three regimes: the power series for small arguments, the algebraic
//! asymptotic expansion for large ones, and a positive real integral
//! representation whenever neither reaches the requested tolerance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gamma::{rgamma, rgamma_signed};
use super::{check_nu, EvalPolicy, MODULE};
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_pieces, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Closed,
    Series,
    Asymptotic,
    Integral,
}

enum SeriesOutcome {
    Converged(f64),
    Cancellation,
}

/// `E_ν(z)` for `ν ∈ (0, 1]`, `z ≤ 0`.
pub fn mittag_leffler(nu: f64, z: f64, policy: &EvalPolicy) -> Result<f64> {
    mittag_leffler_with_regime(nu, 1.0, z, policy).map(|(v, _)| v)
}

/// `E_{ν,μ}(z) = Σ z^h / Γ(νh + μ)` for `ν ∈ (0, 1]`, `μ > 0`, `z ≤ 0`.
///
/// The integral fallback is available for `μ = 1` and `μ = ν`; other `μ`
/// rely on the series and asymptotic regimes alone.
pub fn mittag_leffler_two_param(nu: f64, mu: f64, z: f64, policy: &EvalPolicy) -> Result<f64> {
    mittag_leffler_with_regime(nu, mu, z, policy).map(|(v, _)| v)
}

/// Like [`mittag_leffler_two_param`], also reporting which regime produced
/// the value.
pub fn mittag_leffler_with_regime(nu: f64, mu: f64, z: f64, policy: &EvalPolicy) -> Result<(f64, Regime)> {
    check_nu(nu)?;
    policy.validate()?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(MODULE, format!("mu must be positive, got {mu}")));
    }
    if !(z <= 0.0) {
        return Err(Error::domain(MODULE, format!("argument must satisfy z <= 0, got {z}")));
    }
    let x = -z;
    if x == 0.0 {
        return Ok((rgamma_signed(mu).to_f64(), Regime::Closed));
    }
    if nu == 1.0 && mu == 1.0 {
        return Ok(((-x).exp(), Regime::Closed));
    }
    if x.is_infinite() {
        return Ok((0.0, Regime::Closed));
    }
    let tol = policy.target_abs_tol;

    if x <= policy.series_cutoff {
        match series(nu, mu, x, tol, policy.max_terms)? {
            SeriesOutcome::Converged(v) => return Ok((v, Regime::Series)),
            SeriesOutcome::Cancellation => {}
        }
    }
    if let Some(v) = asymptotic(nu, mu, x, tol) {
        return Ok((v, Regime::Asymptotic));
    }
    if mu == 1.0 {
        return Ok((integral_mu_one(nu, x, tol)?, Regime::Integral));
    }
    if mu == nu {
        return Ok((integral_mu_nu(nu, x, tol)?, Regime::Integral));
    }
    Err(Error::eval(
        MODULE,
        format!("no regime reaches tolerance {tol:e} for E_{{{nu},{mu}}}(-{x})"),
    ))
}

fn series(nu: f64, mu: f64, x: f64, tol: f64, max_terms: usize) -> Result<SeriesOutcome> {
    let ln_x = x.ln();
    let abandon = tol / (16.0 * f64::EPSILON);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max_term = 0.0_f64;
    let mut prev_ln = f64::INFINITY;
    for h in 0..max_terms {
        let a = nu * h as f64 + mu;
        let r = rgamma_signed(a);
        let ln_mag = h as f64 * ln_x + r.ln_abs;
        if ln_mag > abandon.ln() {
            return Ok(SeriesOutcome::Cancellation);
        }
        // direct products are more accurate than exp of a log difference
        let pow = x.powi(h as i32);
        let mag = if a < 170.0 && pow.is_finite() && pow > 0.0 {
            pow * rgamma(a)
        } else {
            ln_mag.exp()
        };
        let term = if h % 2 == 0 { mag } else { -mag };
        let t = sum + term;
        if f64::abs(sum) >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        max_term = max_term.max(mag);
        let decreasing = ln_mag < prev_ln;
        prev_ln = ln_mag;
        if h > 0 && decreasing && mag <= 1e-3 * f64::EPSILON * (sum + comp).abs().max(tol) {
            if 16.0 * f64::EPSILON * max_term > tol {
                return Ok(SeriesOutcome::Cancellation);
            }
            return Ok(SeriesOutcome::Converged(sum + comp));
        }
    }
    Err(Error::eval(
        MODULE,
        format!("power series for E_{{{nu},{mu}}}(-{x}) did not converge within {max_terms} terms"),
    ))
}

/// Asymptotic expansion truncated at its smallest term; `None` if the
/// truncation error or the exponentially small remainder exceeds `tol`.
fn asymptotic(nu: f64, mu: f64, x: f64, tol: f64) -> Option<f64> {
    // For ν > 2/3 a conjugate pair of exponentially damped terms of size
    // ~ exp(x^{1/ν} cos(π/ν)) is not captured by the algebraic series.
    let cos = (PI / nu).cos();
    let remnant = if nu > 2.0 / 3.0 && cos < 0.0 {
        (2.0 / nu) * ((1.0 - mu) / nu * x.ln() + x.powf(1.0 / nu) * cos).exp()
    } else {
        0.0
    };
    if remnant > 0.1 * tol {
        return None;
    }
    let ln_x = x.ln();
    let mut sum = 0.0;
    let mut prev_ln = f64::INFINITY;
    for k in 1..400u32 {
        let r = rgamma_signed(mu - nu * k as f64);
        if r.is_zero() {
            continue;
        }
        let ln_mag = -(k as f64) * ln_x + r.ln_abs;
        if ln_mag > prev_ln {
            // smallest term passed; the first omitted term bounds the error
            return if 2.0 * ln_mag.exp() <= tol { Some(sum) } else { None };
        }
        let mag = ln_mag.exp();
        if mag <= 1e-3 * f64::EPSILON * sum.abs() {
            return Some(sum);
        }
        prev_ln = ln_mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * r.sign as f64 * mag;
    }
    None
}

fn kernel_breaks(nu: f64, scale: f64) -> Vec<f64> {
    let mut b = vec![0.0, 1.0];
    let c = (nu * PI).cos();
    if c < 0.0 {
        let s = (nu * PI).sin();
        for p in [-c - s, -c, -c + s] {
            if p > 0.0 && p < 1.0 {
                b.push(p);
            }
        }
    }
    if scale > 0.0 && scale < 1.0 {
        b.push(scale);
    }
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

fn quad_opts(tol: f64, prefactor: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 0.05 * tol / prefactor.max(f64::MIN_POSITIVE),
        rel_tol: 1e-14,
        max_intervals: 4000,
    }
}

fn integral_mu_one(nu: f64, x: f64, tol: f64) -> Result<f64> {
    let c = (nu * PI).cos();
    let pre = (nu * PI).sin() / (PI * nu);
    let d = move |w: f64| w * w + 2.0 * w * c + 1.0;
    let p = 1.0 / nu;
    let opts = quad_opts(tol, pre);
    let first = integrate_pieces(|w| (-(x * w).powf(p)).exp() / d(w), &kernel_breaks(nu, 1.0 / x), opts)
        .map_err(|e| tag(e, nu, x))?;
    let second = integrate_pieces(
        |v| {
            if v == 0.0 {
                0.0
            } else {
                (-(x / v).powf(p)).exp() / d(v)
            }
        },
        &kernel_breaks(nu, x.min(1.0) * 0.5),
        opts,
    )
    .map_err(|e| tag(e, nu, x))?;
    Ok(pre * (first.value + second.value))
}

fn integral_mu_nu(nu: f64, x: f64, tol: f64) -> Result<f64> {
    let c = (nu * PI).cos();
    let p = 1.0 / nu;
    let pre = (nu * PI).sin() / (PI * nu) * x.powf(p - 1.0);
    let d = move |w: f64| w * w + 2.0 * w * c + 1.0;
    let opts = quad_opts(tol, pre);
    let first = integrate_pieces(
        |w| (p * w.ln() - (x * w).powf(p)).exp() / d(w),
        &kernel_breaks(nu, 1.0 / x),
        opts,
    )
    .map_err(|e| tag(e, nu, x))?;
    let second = integrate_pieces(
        |v| {
            if v == 0.0 {
                0.0
            } else {
                (-p * v.ln() - (x / v).powf(p)).exp() / d(v)
            }
        },
        &kernel_breaks(nu, x.min(1.0) * 0.5),
        opts,
    )
    .map_err(|e| tag(e, nu, x))?;
    Ok(pre * (first.value + second.value))
}

fn tag(e: Error, nu: f64, x: f64) -> Error {
    Error::eval(MODULE, format!("integral representation of E_{nu}(-{x}) failed: {e}"))
}
