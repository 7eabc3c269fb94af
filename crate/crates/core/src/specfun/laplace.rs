//! Incomplete Laplace transforms of `y ↦ E_ν(-λ y^ν)`:
//!
//! ```text
//! lower = ∫_0^t e^{-βy} E_ν(-λ y^ν) dy,   upper = ∫_t^∞ e^{-βy} E_ν(-λ y^ν) dy,
//! lower + upper = β^{ν-1} / (β^ν + λ).
//! ```
//!
//! The incomplete-gamma series are used when they converge cleanly; otherwise
//! the functions fall back to the positive integral representation of `E_ν`,
//! which turns both transforms into integrals of smooth positive functions.

use std::f64::consts::PI;

use super::gamma::{lower_inc_gamma_reg, upper_inc_gamma_reg};
use super::{check_nu, EvalPolicy, MODULE};
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_pieces, QuadOptions};

fn check_args(nu: f64, lam: f64, beta: f64, t: f64) -> Result<()> {
    check_nu(nu)?;
    if !(lam >= 0.0 && lam.is_finite()) {
        return Err(Error::domain(MODULE, format!("lambda must be >= 0, got {lam}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(MODULE, format!("beta must be > 0, got {beta}")));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(MODULE, format!("t must be >= 0, got {t}")));
    }
    Ok(())
}

/// Full transform `β^{ν-1} / (β^ν + λ)`.
pub fn ml_laplace_full(nu: f64, lam: f64, beta: f64) -> Result<f64> {
    check_args(nu, lam, beta, 0.0)?;
    let bn = beta.powf(nu);
    Ok(bn / beta / (bn + lam))
}

/// Lower incomplete transform `∫_0^t e^{-βy} E_ν(-λ y^ν) dy`.
pub fn ml_laplace_lower(nu: f64, lam: f64, beta: f64, t: f64, policy: &EvalPolicy) -> Result<f64> {
    check_args(nu, lam, beta, t)?;
    policy.validate()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if lam == 0.0 {
        return Ok(-(-beta * t).exp_m1() / beta);
    }
    if nu == 1.0 {
        let s = beta + lam;
        return Ok(-(-s * t).exp_m1() / s);
    }
    if t.is_infinite() {
        return ml_laplace_full(nu, lam, beta);
    }
    match ml_laplace_lower_series(nu, lam, beta, t, policy) {
        Ok(v) => Ok(v),
        Err(_) => integral(nu, lam, beta, t, policy.target_abs_tol, Part::Lower),
    }
}

/// Upper incomplete transform `∫_t^∞ e^{-βy} E_ν(-λ y^ν) dy`.
pub fn ml_laplace_upper(nu: f64, lam: f64, beta: f64, t: f64, policy: &EvalPolicy) -> Result<f64> {
    check_args(nu, lam, beta, t)?;
    policy.validate()?;
    if t == 0.0 {
        return ml_laplace_full(nu, lam, beta);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    if lam == 0.0 {
        return Ok((-beta * t).exp() / beta);
    }
    if nu == 1.0 {
        let s = beta + lam;
        return Ok((-s * t).exp() / s);
    }
    match ml_laplace_upper_series(nu, lam, beta, t, policy) {
        Ok(v) => Ok(v),
        Err(_) => integral(nu, lam, beta, t, policy.target_abs_tol, Part::Upper),
    }
}

/// Lower transform by the series `β^{-1} Σ_r P(νr+1, βt) (-λ/β^ν)^r`.
///
/// Fails with an evaluation error when cancellation or slow convergence
/// prevents reaching the policy tolerance; callers should then use the
/// complement identity or the automatic routine.
pub fn ml_laplace_lower_series(nu: f64, lam: f64, beta: f64, t: f64, policy: &EvalPolicy) -> Result<f64> {
    check_args(nu, lam, beta, t)?;
    let rho = lam / beta.powf(nu);
    let bt = beta * t;
    incgamma_series(nu, rho, bt, beta, policy, lower_inc_gamma_reg, "lower")
}

/// Upper transform by the series `β^{-1} Σ_r Q(νr+1, βt) (-λ/β^ν)^r`,
/// which converges only for `λ < β^ν`.
pub fn ml_laplace_upper_series(nu: f64, lam: f64, beta: f64, t: f64, policy: &EvalPolicy) -> Result<f64> {
    check_args(nu, lam, beta, t)?;
    let rho = lam / beta.powf(nu);
    if rho >= 1.0 {
        return Err(Error::eval(
            MODULE,
            format!("upper series diverges for lambda/beta^nu = {rho} >= 1; use the complement identity"),
        ));
    }
    incgamma_series(nu, rho, beta * t, beta, policy, upper_inc_gamma_reg, "upper")
}

fn incgamma_series(
    nu: f64,
    rho: f64,
    bt: f64,
    beta: f64,
    policy: &EvalPolicy,
    reg: fn(f64, f64) -> Result<f64>,
    which: &str,
) -> Result<f64> {
    let tol = policy.target_abs_tol * beta;
    let abandon = tol / (16.0 * f64::EPSILON);
    let ln_rho = rho.ln();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut max_term = 0.0_f64;
    let mut small_run = 0;
    for r in 0..policy.max_terms.max(64) * 4 {
        let w = reg(nu * r as f64 + 1.0, bt)?;
        let mag = if r == 0 { w } else { w * (r as f64 * ln_rho).exp() };
        if mag > abandon || !mag.is_finite() {
            break;
        }
        let term = if r % 2 == 0 { mag } else { -mag };
        let s = sum + term;
        if f64::abs(sum) >= term.abs() {
            comp += (sum - s) + term;
        } else {
            comp += (term - s) + sum;
        }
        sum = s;
        max_term = max_term.max(mag);
        if r > 0 && mag <= 1e-3 * f64::EPSILON * (sum + comp).abs().max(tol) {
            small_run += 1;
            if small_run >= 2 {
                if 16.0 * f64::EPSILON * max_term > tol {
                    break;
                }
                return Ok((sum + comp) / beta);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::eval(
        MODULE,
        format!(
            "{which} incomplete-gamma series did not reach tolerance (lambda/beta^nu = {rho}, beta*t = {bt}); \
             use the complement identity"
        ),
    ))
}

#[derive(Clone, Copy)]
enum Part {
    Lower,
    Upper,
}

/// Integral form: with `s(w) = (λw)^{1/ν}`,
/// `E_ν(-λy^ν) = C ∫_0^∞ e^{-s(w) y} dw / (w² + 2w cos νπ + 1)`, so
/// lower = `C ∫ (1 - e^{-(β+s)t})/(β+s) dw/D(w)` and
/// upper = `C ∫ e^{-(β+s)t}/(β+s) dw/D(w)`. The half-line is folded onto
/// `[0, 1]` with `w ↦ 1/w`.
fn integral(nu: f64, lam: f64, beta: f64, t: f64, tol: f64, part: Part) -> Result<f64> {
    let c = (nu * PI).cos();
    let pre = (nu * PI).sin() / (PI * nu);
    let p = 1.0 / nu;
    let d = move |w: f64| w * w + 2.0 * w * c + 1.0;
    let g = move |s: f64| {
        let a = beta + s;
        match part {
            Part::Lower => -(-a * t).exp_m1() / a,
            Part::Upper => (-a * t).exp() / a,
        }
    };
    let opts = QuadOptions {
        abs_tol: 0.05 * tol / pre,
        rel_tol: 1e-14,
        max_intervals: 4000,
    };
    // where s(w) crosses β and 1/t
    let w_beta = beta.powf(nu) / lam;
    let w_t = t.powf(-nu) / lam;
    let mut b1 = vec![0.0, 1.0];
    let mut b2 = vec![0.0, 1.0];
    for w in [w_beta, w_t] {
        if w > 0.0 && w < 1.0 {
            b1.push(w);
        }
        let v = 1.0 / w;
        if v > 0.0 && v < 1.0 {
            b2.push(v);
        }
    }
    if c < 0.0 {
        let s = (nu * PI).sin();
        for q in [-c - s, -c, -c + s] {
            if q > 0.0 && q < 1.0 {
                b1.push(q);
                b2.push(q);
            }
        }
    }
    for b in [&mut b1, &mut b2] {
        b.sort_by(f64::total_cmp);
        b.dedup();
    }
    let first = integrate_pieces(|w| g((lam * w).powf(p)) / d(w), &b1, opts);
    let second = integrate_pieces(
        |v| {
            if v == 0.0 {
                0.0
            } else {
                g((lam / v).powf(p)) / d(v)
            }
        },
        &b2,
        opts,
    );
    match (first, second) {
        (Ok(a), Ok(b)) => Ok(pre * (a.value + b.value)),
        (Err(e), _) | (_, Err(e)) => Err(Error::eval(
            MODULE,
            format!("integral form of the incomplete transform failed: {e}"),
        )),
    }
}
