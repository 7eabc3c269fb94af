//! In-link count of a webpage picked uniformly at random: finite-time and
//! limiting distributions and means, including the two saturating examples.
//!
//! Pages are born as a Yule process of rate `β`; the age of a uniformly
//! chosen page at time `t` has density `β e^{−βy}/(1 − e^{−βt})` on `[0, t]`,
//! so every finite-time quantity is a truncated Laplace transform at `β` of
//! the corresponding quantity of the in-link process.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnbp::kernels::{contour_states, contour_tails, monitored_sum, PfWeights, TailWeights, INNER_TOL};
use crate::fnbp::{state_pmf, MeanEstimate, ProcessSpec, MEAN_TAIL_TOL};
use crate::numerics::exact::{Dyadic, FixedSum};
use crate::numerics::quad::{integrate_vec, QuadOptions};
use crate::numerics::{CancellationMonitor, SignedLog, LOST_DIGITS_BUDGET};
use crate::pmf::Pmf;
use crate::rates::find_collisions;
use crate::specfun::{inc_beta, ln_binomial, ml_laplace_lower, ml_laplace_upper, pochhammer_parts, EvalPolicy};

const MODULE: &str = "yule_net";

/// Largest `n_max` chosen when the caller does not give one.
pub const DEFAULT_N_MAX: u64 = 1000;

/// Absolute tolerance of the quadrature route, after normalization.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// Error bound a monitored finite-time probability may carry.
pub const FORMULA_ABS_TARGET: f64 = 1e-8;

/// Page creation rate and the in-link process.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub process: ProcessSpec,
}

impl ModelParams {
    pub fn new(beta: f64, process: ProcessSpec) -> Result<Self> {
        let mp = ModelParams { beta, process };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::domain(MODULE, format!("beta must be positive, got {}", self.beta)));
        }
        self.process.validate()
    }

    pub fn nu(&self) -> f64 {
        self.process.nu
    }

    /// `β^ν`.
    pub fn beta_nu(&self) -> f64 {
        self.beta.powf(self.process.nu)
    }

    /// `ρ_r = λ_r / β^ν`.
    pub fn rho(&self, r: u64) -> f64 {
        self.process.rate(r) / self.beta_nu()
    }

    /// `min(support_max, DEFAULT_N_MAX)`.
    pub fn default_n_max(&self) -> u64 {
        self.process.rates.support_max().map_or(DEFAULT_N_MAX, |s| s.min(DEFAULT_N_MAX))
    }
}

/// Formula used by [`finite_time_pmf_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteRoute {
    /// Picks the stable closed form for the rate family and falls back to
    /// contour inversion when a monitored sum loses too many digits.
    #[default]
    Auto,
    /// Partial fractions with incomplete Laplace transforms of `E_ν`.
    PartialFraction,
    /// `ν = 1`, distinct rates: elementary brackets.
    NuOneClosed,
    /// Linear rates: limit minus the upper incomplete Laplace correction.
    LinearSplit,
    /// `ν = 1`, linear rates: incomplete Beta function.
    IncompleteBeta,
    /// Adaptive quadrature of the state probabilities over the page age.
    Quadrature,
    /// Contour inversion of `L_n(z + β)/z`.
    Contour,
}

fn check_t(t: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { t >= 0.0 } else { t > 0.0 };
    if !(ok && t.is_finite()) {
        return Err(Error::domain(MODULE, format!("t must be positive and finite, got {t}")));
    }
    Ok(())
}

fn precision(lost: f64, what: &'static str) -> Error {
    Error::Precision {
        module: MODULE,
        lost_digits: if lost.is_finite() { lost } else { f64::MAX },
        budget: LOST_DIGITS_BUDGET,
        advice: what,
    }
}

/// `P(ₜ𝔑^ν = n)` for `start_count ≤ n ≤ n_max`.
pub fn finite_time_pmf(mp: &ModelParams, t: f64, n_max: u64) -> Result<Pmf> {
    finite_time_pmf_with(mp, t, n_max, FiniteRoute::Auto)
}

pub fn finite_time_pmf_with(mp: &ModelParams, t: f64, n_max: u64, route: FiniteRoute) -> Result<Pmf> {
    mp.validate()?;
    check_t(t, false)?;
    let spec = &mp.process;
    let k = spec.start_count;
    if n_max < k {
        return Err(Error::domain(MODULE, format!("n_max = {n_max} is below start_count = {k}")));
    }
    let top = spec.top_state(n_max);
    spec.rates.validate_up_to(top)?;
    let linear = spec.rates.linear_slope();
    let nu_one = spec.nu == 1.0;
    let (mut probs, method) = match route {
        FiniteRoute::Auto => {
            if let (Some(l), true, 1) = (linear, nu_one, k) {
                (incomplete_beta(mp, l, t, top)?, "incomplete_beta")
            } else if let (Some(l), 1) = (linear, k) {
                let head = linear_split(mp, l, t, top, true)?;
                with_contour_tail(mp, t, top, head, "linear_split")
            } else if !find_collisions(&spec.rates_from_start(top), k).is_empty() {
                (contour_finite(mp, t, top), "contour")
            } else {
                let head = partial_fraction(mp, t, top, true)?;
                let tag = if nu_one { "nu_one_closed" } else { "partial_fraction" };
                with_contour_tail(mp, t, top, head, tag)
            }
        }
        FiniteRoute::PartialFraction => (partial_fraction(mp, t, top, false)?, "partial_fraction"),
        FiniteRoute::NuOneClosed => {
            if !nu_one {
                return Err(Error::routing(MODULE, "the elementary-bracket route needs nu = 1"));
            }
            (partial_fraction(mp, t, top, false)?, "nu_one_closed")
        }
        FiniteRoute::LinearSplit => {
            let l = linear_only(linear, k)?;
            (linear_split(mp, l, t, top, false)?, "linear_split")
        }
        FiniteRoute::IncompleteBeta => {
            let l = linear_only(linear, k)?;
            if !nu_one {
                return Err(Error::routing(MODULE, "the incomplete-Beta route needs nu = 1"));
            }
            (incomplete_beta(mp, l, t, top)?, "incomplete_beta")
        }
        FiniteRoute::Quadrature => (quadrature(mp, t, top)?, "quadrature"),
        FiniteRoute::Contour => (contour_finite(mp, t, top), "contour"),
    };
    probs.resize((n_max - k + 1) as usize, 0.0);
    let pmf = Pmf::new(k, probs, method).clamp_negatives();
    let tail = if spec.rates.support_max().is_some_and(|s| n_max >= s) {
        0.0
    } else {
        1.0 - pmf.total()
    };
    Ok(pmf.with_tail(tail))
}

fn linear_only(linear: Option<f64>, k: u64) -> Result<f64> {
    match (linear, k) {
        (Some(l), 1) => Ok(l),
        _ => Err(Error::routing(MODULE, "this route needs linear rates and a single initial in-link")),
    }
}

/// `1/(1 − e^{−βt})`.
fn age_norm(beta: f64, t: f64) -> f64 {
    -1.0 / (-beta * t).exp_m1()
}

fn with_contour_tail(mp: &ModelParams, t: f64, top: u64, mut head: Vec<f64>, tag: &'static str) -> (Vec<f64>, &'static str) {
    let want = (top - mp.process.start_count + 1) as usize;
    if head.len() == want {
        return (head, tag);
    }
    let c = contour_finite(mp, t, top);
    let done = head.len();
    head.extend_from_slice(&c[done..]);
    let tag = match tag {
        "linear_split" => "linear_split+contour",
        "nu_one_closed" => "nu_one_closed+contour",
        _ => "partial_fraction+contour",
    };
    (head, tag)
}

fn contour_finite(mp: &ModelParams, t: f64, top: u64) -> Vec<f64> {
    let spec = &mp.process;
    let scale = mp.beta * age_norm(mp.beta, t);
    contour_states(spec.nu, &spec.rates_from_start(top), t, mp.beta, true)
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

/// `β/(1−e^{−βt}) Σ_m w_m ∫_0^t e^{−βy} E_ν(−λ_m y^ν) dy`.
fn partial_fraction(mp: &ModelParams, t: f64, top: u64, partial: bool) -> Result<Vec<f64>> {
    let spec = &mp.process;
    let lambdas = spec.rates_from_start(top);
    if let Some(&(i, j)) = find_collisions(&lambdas, spec.start_count).first() {
        return Err(Error::routing(
            MODULE,
            format!("partial fractions need distinct rates, but lambda_{i} = lambda_{j}"),
        ));
    }
    let inner = EvalPolicy::default().tightened(INNER_TOL);
    let scale = mp.beta * age_norm(mp.beta, t);
    let mut weights = PfWeights::new(lambdas[0]);
    let mut brackets = Vec::with_capacity(lambdas.len());
    let mut out = Vec::with_capacity(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        if i > 0 {
            weights.push(l);
        }
        let b = if spec.nu == 1.0 {
            -(-(mp.beta + l) * t).exp_m1() / (mp.beta + l)
        } else {
            match ml_laplace_lower(spec.nu, l, mp.beta, t, &inner) {
                Ok(v) => v,
                Err(_) if partial => break,
                Err(e) => return Err(e),
            }
        };
        brackets.push(b);
        let value_err = if spec.nu == 1.0 {
            4.0 * f64::EPSILON / mp.beta
        } else {
            inner.target_abs_tol
        };
        let m = monitored_sum(0.0, scale, weights.weights(), &brackets, value_err);
        if !m.trusted_within(FORMULA_ABS_TARGET) {
            if partial {
                break;
            }
            return Err(precision(m.lost_digits, "use FiniteRoute::Auto, Contour or Quadrature"));
        }
        out.push(m.value);
    }
    Ok(out)
}

/// Linear rates: `[q_n − β Σ_j C(n−1, j−1) (−1)^{j−1} U_ν(λj; β, t)] / (1 − e^{−βt})`,
/// where `q_n` is the limiting probability and `U_ν` the upper incomplete
/// Laplace transform of `E_ν(−λ j y^ν)`.
fn linear_split(mp: &ModelParams, lambda: f64, t: f64, top: u64, partial: bool) -> Result<Vec<f64>> {
    let nu = mp.nu();
    let inner = EvalPolicy::default().tightened(INNER_TOL);
    let norm = age_norm(mp.beta, t);
    let limit = limiting_pmf(mp, top)?;
    let mut upper = Vec::new();
    let mut out = Vec::new();
    for n in 1..=top {
        match ml_laplace_upper(nu, lambda * n as f64, mp.beta, t, &inner) {
            Ok(v) => upper.push(v),
            Err(_) if partial => break,
            Err(e) => return Err(e),
        }
        let mut ln_c = 0.0;
        let weights: Vec<SignedLog> = (1..=n)
            .map(|j| {
                if j > 1 {
                    ln_c += ((n - j + 1) as f64).ln() - ((j - 1) as f64).ln();
                }
                SignedLog {
                    sign: if j % 2 == 1 { 1 } else { -1 },
                    ln_abs: ln_c,
                }
            })
            .collect();
        let m = monitored_sum(limit.prob(n) * norm, -mp.beta * norm, &weights, &upper, inner.target_abs_tol);
        if !m.trusted_within(FORMULA_ABS_TARGET) {
            if partial {
                break;
            }
            return Err(precision(m.lost_digits, "use FiniteRoute::Auto, Contour or Quadrature"));
        }
        out.push(m.value);
    }
    Ok(out)
}

/// `ν = 1`, linear: `(β/λ)/(1 − e^{−βt}) · Be(1 − e^{−λt}; n, β/λ + 1)`.
fn incomplete_beta(mp: &ModelParams, lambda: f64, t: f64, top: u64) -> Result<Vec<f64>> {
    let z = -(-lambda * t).exp_m1();
    let r = mp.beta / lambda;
    let pre = r * age_norm(mp.beta, t);
    (1..=top).map(|n| Ok(pre * inc_beta(z, n as f64, r + 1.0)?)).collect()
}

/// `β/(1−e^{−βt}) ∫_0^t e^{−βy} p_n(y) dy` by adaptive Gauss–Kronrod.
fn quadrature(mp: &ModelParams, t: f64, top: u64) -> Result<Vec<f64>> {
    let spec = &mp.process;
    let dim = (top - spec.start_count + 1) as usize;
    let norm = age_norm(mp.beta, t);
    let scale = mp.beta * norm;
    let opts = QuadOptions {
        abs_tol: QUADRATURE_TOL / scale,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let mut failure = None;
    let r = integrate_vec(
        |y, out: &mut [f64]| match state_pmf(spec, y, top) {
            Ok(p) => {
                let w = (-mp.beta * y).exp();
                for (o, v) in out.iter_mut().zip(p.probs.iter()) {
                    *o = w * v;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = 0.0);
            }
        },
        dim,
        0.0,
        t,
        opts,
    )
    .map_err(|e| Error::Quadrature {
        module: MODULE,
        message: e.to_string(),
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value.into_iter().map(|v| v * scale).collect())
}

/// `q_n = Π_{k≤r<n} ρ_r/(1+ρ_r) · 1/(1+ρ_n)` with `ρ_r = λ_r/β^ν`.
///
/// The listed probabilities and the exact tail mass `Π_{r≤n_max} ρ_r/(1+ρ_r)`
/// add up to one.
pub fn limiting_pmf(mp: &ModelParams, n_max: u64) -> Result<Pmf> {
    mp.validate()?;
    let spec = &mp.process;
    let k = spec.start_count;
    if n_max < k {
        return Err(Error::domain(MODULE, format!("n_max = {n_max} is below start_count = {k}")));
    }
    let top = spec.top_state(n_max);
    spec.rates.validate_up_to(top)?;
    let bnu = mp.beta_nu();
    let mut probs = Vec::with_capacity((n_max - k + 1) as usize);
    // ln Π ρ_r/(1+ρ_r) so far
    let mut ln_stay = CancellationMonitor::new();
    let mut absorbed = false;
    for n in k..=n_max {
        if absorbed {
            probs.push(0.0);
            continue;
        }
        let rho = spec.rate(n) / bnu;
        if rho == 0.0 {
            probs.push(ln_stay.value().exp());
            absorbed = true;
            continue;
        }
        probs.push((ln_stay.value() - rho.ln_1p()).exp());
        ln_stay.add(-(1.0 / rho).ln_1p());
    }
    let tail = if absorbed { 0.0 } else { ln_stay.value().exp() };
    Ok(Pmf::new(k, probs, "product").with_tail(tail))
}

/// First saturating example, `λ_j = λ(N − j)`, at `ρ = λ/β^ν`:
/// `C(N−1, N−n) Σ_{m=1}^n C(n−1, m−1) (−1)^{n−m} / (1 + ρ(N − m))`.
///
/// The alternating sum is monitored; when it loses too many digits it is
/// re-summed exactly in binary fixed point.
pub fn limiting_pmf_saturating_s1(rho: f64, n_cap: u64, n: u64) -> Result<f64> {
    check_rho(rho)?;
    if n < 1 || n > n_cap {
        return Err(Error::domain(MODULE, format!("need 1 <= n <= N, got n = {n}, N = {n_cap}")));
    }
    if n_cap == 1 {
        // single absorbing state
        return Ok(1.0);
    }
    let ln_lead = ln_binomial(n_cap - 1, n_cap - n);
    let mut ln_c = 0.0;
    let mut weights = Vec::with_capacity(n as usize);
    let mut values = Vec::with_capacity(n as usize);
    for m in 1..=n {
        if m > 1 {
            ln_c += ((n - m + 1) as f64).ln() - ((m - 1) as f64).ln();
        }
        weights.push(SignedLog {
            sign: if (n - m).is_multiple_of(2) { 1 } else { -1 },
            ln_abs: ln_lead + ln_c,
        });
        values.push(1.0 / (1.0 + rho * (n_cap - m) as f64));
    }
    let m = monitored_sum(0.0, 1.0, &weights, &values, 2.0 * f64::EPSILON);
    if m.trusted() && m.value.abs() > 1e3 * m.abs_error {
        return Ok(m.value.max(0.0));
    }
    Ok(s1_exact(rho, n_cap, n, ln_lead))
}

fn s1_exact(rho: f64, n_cap: u64, n: u64, ln_lead: f64) -> f64 {
    // size estimate from the product form
    let ln_est = (1..n).map(|r| -(1.0 / (rho * (n_cap - r) as f64)).ln_1p()).sum::<f64>()
        - (rho * (n_cap - n) as f64).ln_1p();
    let need = (ln_lead - ln_est) / std::f64::consts::LN_2 + 64.0 + (n as f64).log2();
    let bits = need.ceil().clamp(64.0, 200_000.0) as u32;
    let rho_d = Dyadic::from_f64(rho);
    let one = Dyadic::from_u64(1);
    let mut sum = FixedSum::new(bits);
    let mut c = BigInt::from(1u32);
    for m in 1..=n {
        if m > 1 {
            c = c * BigInt::from(n - m + 1) / BigInt::from(m - 1);
        }
        let num = if (n - m).is_multiple_of(2) { c.clone() } else { -c.clone() };
        let den = one.add(&rho_d.mul(&Dyadic::from_u64(n_cap - m)));
        sum.add_ratio(&Dyadic::from_bigint(num), &den);
    }
    let s = sum.value();
    (ln_lead.exp() * s).max(0.0)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain(MODULE, format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Second saturating example, `λ_r = λ r(N − r)`, at `ρ = λ/β^ν`:
/// `(−1)^n/ρ · (n−1)!(N−1)!/(N−n)! / ((a−b)_n (a+b)_n)` with `a = 1 − N/2`,
/// `b = √(N² + 4/ρ)/2`.
///
/// `a − b` and `a + b` are carried as integer plus offset so the factors
/// that nearly vanish keep full relative accuracy. At `ρ = 1/(N+1)` the
/// value is cross-checked against `(1 + 1/N)/(n² + n)`.
pub fn limiting_pmf_saturating_s2(rho: f64, n_cap: u64, n: u64) -> Result<f64> {
    check_rho(rho)?;
    if n < 1 || n > n_cap {
        return Err(Error::domain(MODULE, format!("need 1 <= n <= N, got n = {n}, N = {n_cap}")));
    }
    if n_cap == 1 {
        return Ok(1.0);
    }
    let nf = n_cap as f64;
    let b = (nf * nf + 4.0 / rho).sqrt() / 2.0;
    // δ = N/2 − b, formed without cancellation
    let delta = -(1.0 / rho) / (nf / 2.0 + b);
    let amb = pochhammer_parts(1.0 - nf, delta, n);
    let apb = pochhammer_parts(1.0, -delta, n);
    let mut ln = CancellationMonitor::new();
    ln.add(-rho.ln());
    ln.add(ln_factorial(n - 1));
    ln.add(ln_factorial(n_cap - 1));
    ln.add(-ln_factorial(n_cap - n));
    ln.add(-amb.ln_abs);
    ln.add(-apb.ln_abs);
    let sign = (if n.is_multiple_of(2) { 1 } else { -1 }) * amb.sign * apb.sign;
    let v = f64::from(sign) * ln.value().exp();
    if ((rho * (nf + 1.0)) - 1.0).abs() < 1e-12 {
        let closed = (1.0 + 1.0 / nf) / ((n * n + n) as f64);
        if (v - closed).abs() > 1e-10 {
            return Err(precision(
                (v - closed).abs().log10() + 10.0,
                "closed form at rho = 1/(N+1) disagrees; use limiting_pmf with the saturating rates",
            ));
        }
    }
    Ok(v)
}

/// `ln k!` by compensated summation of `ln j`.
fn ln_factorial(k: u64) -> f64 {
    if k > 100_000 {
        return crate::specfun::log_gamma(k as f64 + 1.0).unwrap_or(f64::INFINITY);
    }
    let mut acc = CancellationMonitor::new();
    for j in 2..=k {
        acc.add((j as f64).ln());
    }
    acc.value()
}

/// Product form for the second saturating example:
/// `Π_{r<n} ρ r(N−r)/(1 + ρ r(N−r)) · 1/(1 + ρ n(N−n))`.
pub fn saturating_s2_product(rho: f64, n_cap: u64, n: u64) -> Result<f64> {
    check_rho(rho)?;
    if n < 1 || n > n_cap {
        return Err(Error::domain(MODULE, format!("need 1 <= n <= N, got n = {n}, N = {n_cap}")));
    }
    let mut ln = CancellationMonitor::new();
    for r in 1..n {
        ln.add(-(1.0 / (rho * (r * (n_cap - r)) as f64)).ln_1p());
    }
    ln.add(-(rho * (n * (n_cap - n)) as f64).ln_1p());
    Ok(ln.value().exp())
}

/// State whose probability [`saturation_tail_curve`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailState {
    /// `n = N`.
    Top,
    /// `n = N − 1`.
    BelowTop,
}

/// Base of the scaling `ρ = 1/base^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoBase {
    #[default]
    NPlusOne,
    NMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub n_cap: u64,
    pub rho: f64,
    pub prob: f64,
}

/// `P(𝔑_{s2} = N)` (or `N − 1`) along `ρ = 1/base^α` for each `N` in the grid.
pub fn saturation_tail_curve(alpha: f64, n_grid: &[u64], which: TailState, base: RhoBase) -> Result<Vec<TailPoint>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(MODULE, format!("alpha must be positive, got {alpha}")));
    }
    n_grid
        .iter()
        .map(|&n_cap| {
            if n_cap == 0 {
                return Err(Error::domain(MODULE, "N must be at least 1"));
            }
            let b = match base {
                RhoBase::NPlusOne => n_cap as f64 + 1.0,
                RhoBase::NMinusOne => n_cap as f64 - 1.0,
            };
            let rho = if n_cap == 1 { f64::NAN } else { b.powf(-alpha) };
            let prob = match (n_cap, which) {
                (1, TailState::Top) => 1.0,
                (1, TailState::BelowTop) => 0.0,
                (_, TailState::Top) => limiting_pmf_saturating_s2(rho, n_cap, n_cap)?,
                (_, TailState::BelowTop) => limiting_pmf_saturating_s2(rho, n_cap, n_cap - 1)?,
            };
            Ok(TailPoint { n_cap, rho, prob })
        })
        .collect()
}

/// `𝔼 ₜ𝔑^ν = k + Σ_j P(ₜ𝔑^ν > j)`, each tail written through partial
/// fractions and lower incomplete Laplace transforms (elementary brackets
/// at `ν = 1`). Falls back to contour inversion on a monitor trip or when
/// rates repeat. `t = 0` gives the initial count exactly.
pub fn finite_time_mean(mp: &ModelParams, t: f64, k_max: u64) -> Result<MeanEstimate> {
    mp.validate()?;
    check_t(t, true)?;
    let spec = &mp.process;
    let k = spec.start_count;
    let Some(lambdas) = bracket_rates(mp, k_max)? else {
        return Ok(initial_mean(k, if t == 0.0 { "initial" } else { "absorbed" }));
    };
    if t == 0.0 {
        return Ok(initial_mean(k, "initial"));
    }
    let scale = mp.beta * age_norm(mp.beta, t);
    if find_collisions(&lambdas, k).is_empty() {
        let inner = EvalPolicy::default().tightened(INNER_TOL);
        let mut weights = TailWeights::default();
        let mut brackets = Vec::new();
        let mut tails = Vec::new();
        let mut ok = true;
        for &l in &lambdas {
            weights.push(l);
            let b = if spec.nu == 1.0 {
                -(-(mp.beta + l) * t).exp_m1() / (mp.beta + l)
            } else {
                match ml_laplace_lower(spec.nu, l, mp.beta, t, &inner) {
                    Ok(v) => v,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            };
            brackets.push(b);
            let value_err = if spec.nu == 1.0 {
                4.0 * f64::EPSILON / mp.beta
            } else {
                inner.target_abs_tol
            };
            let m = monitored_sum(1.0, -scale, weights.weights(), &brackets, value_err);
            if !m.trusted() {
                ok = false;
                break;
            }
            tails.push(m.value);
            if stop_rule(&tails) {
                break;
            }
        }
        if ok {
            return Ok(sum_tails(k, tails, "partial_fraction"));
        }
    }
    let tails: Vec<f64> = contour_tails(spec.nu, &lambdas, t, mp.beta, true)
        .into_iter()
        .map(|v| (v * scale).clamp(0.0, 1.0))
        .collect();
    Ok(sum_tails(k, truncate_by_rule(tails), "contour"))
}

/// `𝔼 𝔑^ν_∞ = k + Σ_j {1 − Σ_m d_m /(1 + ρ_m)}`. A monitor trip switches to
/// exact fixed-point re-summation of the same rational sums; repeated rates
/// use the product `Π_{r≤j} ρ_r/(1+ρ_r)` for each tail.
pub fn limiting_mean(mp: &ModelParams, k_max: u64) -> Result<MeanEstimate> {
    mp.validate()?;
    let spec = &mp.process;
    let k = spec.start_count;
    let Some(lambdas) = bracket_rates(mp, k_max)? else {
        return Ok(initial_mean(k, "absorbed"));
    };
    let bnu = mp.beta_nu();
    let rhos: Vec<f64> = lambdas.iter().map(|l| l / bnu).collect();
    if !find_collisions(&lambdas, k).is_empty() {
        let mut ln = 0.0;
        let tails = rhos
            .iter()
            .map(|r| {
                ln -= (1.0 / r).ln_1p();
                ln.exp()
            })
            .collect();
        return Ok(sum_tails(k, truncate_by_rule(tails), "product"));
    }
    let mut weights = TailWeights::default();
    let mut values = Vec::new();
    let mut tails = Vec::new();
    let mut exact = false;
    for (j, &r) in rhos.iter().enumerate() {
        weights.push(r);
        values.push(1.0 / (1.0 + r));
        let m = monitored_sum(1.0, -1.0, weights.weights(), &values, 2.0 * f64::EPSILON);
        let v = if m.trusted() {
            m.value
        } else {
            exact = true;
            exact_limit_tail(&rhos[..=j])
        };
        tails.push(v);
        if stop_rule(&tails) {
            break;
        }
    }
    Ok(sum_tails(k, tails, if exact { "partial_fraction+exact" } else { "partial_fraction" }))
}

/// `1 − Σ_m Π_{l≠m} ρ_l/(ρ_l − ρ_m) · 1/(1 + ρ_m)` in exact arithmetic.
fn exact_limit_tail(rhos: &[f64]) -> f64 {
    let d: Vec<Dyadic> = rhos.iter().map(|&r| Dyadic::from_f64(r)).collect();
    let one = Dyadic::from_u64(1);
    // ρ values this far apart from the result need this many bits
    let mut ln_terms_max: f64 = 0.0;
    for (m, &rm) in rhos.iter().enumerate() {
        let s: f64 = rhos
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != m)
            .map(|(_, &rl)| (rl / (rl - rm)).abs().ln())
            .sum();
        ln_terms_max = ln_terms_max.max(s - rm.ln_1p());
    }
    let ln_est = rhos.iter().map(|r| -(1.0 / r).ln_1p()).sum::<f64>();
    let need = (ln_terms_max - ln_est) / std::f64::consts::LN_2 + 64.0 + (rhos.len() as f64).log2();
    let bits = need.ceil().clamp(64.0, 200_000.0) as u32;
    let mut sum = FixedSum::new(bits);
    sum.add_dyadic(&one);
    for (m, dm) in d.iter().enumerate() {
        let mut num = one.clone();
        let mut den = one.add(dm);
        for (l, dl) in d.iter().enumerate() {
            if l != m {
                num = num.mul(dl);
                den = den.mul(&dl.sub(dm));
            }
        }
        sum.add_ratio(&num.neg(), &den);
    }
    sum.value().clamp(0.0, 1.0)
}

/// Rates entering the tail brackets `j = k..=last`, or `None` when the
/// process starts in the absorbing state.
fn bracket_rates(mp: &ModelParams, k_max: u64) -> Result<Option<Vec<f64>>> {
    let spec = &mp.process;
    let k = spec.start_count;
    let last = match spec.rates.support_max() {
        Some(s) => k_max.min(s - 1),
        None => k_max,
    };
    if last < k {
        return Ok(None);
    }
    spec.rates.validate_up_to(last)?;
    Ok(Some(spec.rates_from_start(last)))
}

fn initial_mean(k: u64, method: &'static str) -> MeanEstimate {
    MeanEstimate {
        value: k as f64,
        last_term: 0.0,
        terms: 0,
        method,
    }
}

fn stop_rule(tails: &[f64]) -> bool {
    tails.len() >= 2 && tails[tails.len() - 2..].iter().all(|v| v.abs() < MEAN_TAIL_TOL)
}

fn truncate_by_rule(mut tails: Vec<f64>) -> Vec<f64> {
    if let Some(pos) = (1..tails.len()).find(|&i| tails[i].abs() < MEAN_TAIL_TOL && tails[i - 1].abs() < MEAN_TAIL_TOL) {
        tails.truncate(pos + 1);
    }
    tails
}

fn sum_tails(k: u64, tails: Vec<f64>, method: &'static str) -> MeanEstimate {
    let mut acc = CancellationMonitor::new();
    acc.add(k as f64);
    tails.iter().for_each(|v| acc.add(*v));
    MeanEstimate {
        value: acc.value(),
        last_term: tails.last().map_or(0.0, |v| v.abs()),
        terms: tails.len() as u64,
        method,
    }
}
