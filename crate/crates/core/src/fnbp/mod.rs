//! The fractional nonlinear birth process `𝔑^ν(t)`: state probabilities,
//! their Laplace transforms, the mean and the waiting-time densities.
//!
//! Partial-fraction sums are evaluated under a cancellation monitor. When it
//! trips, the remaining states are obtained by numerically inverting the
//! product-form Laplace transform, which involves no cancellation.

pub(crate) mod kernels;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CancellationMonitor, SignedLog, LOST_DIGITS_BUDGET};
use crate::pmf::Pmf;
use crate::rates::{find_collisions, RateSequence};
use crate::specfun::{ln_binomial, mittag_leffler, mittag_leffler_two_param, EvalPolicy};

use kernels::{contour_states, contour_tails, monitored_sum, Monitored, PfWeights, TailWeights, INNER_TOL};

const MODULE: &str = "fnbp";

const PRECISION_ADVICE: &str = "use the contour route (PmfMethod::Auto or PmfMethod::Contour)";

/// `ν`, the birth rates and the initial population.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub nu: f64,
    pub rates: RateSequence,
    pub start_count: u64,
}

impl ProcessSpec {
    pub fn new(nu: f64, rates: RateSequence) -> Result<Self> {
        Self::with_start(nu, rates, 1)
    }

    pub fn with_start(nu: f64, rates: RateSequence, start_count: u64) -> Result<Self> {
        let s = ProcessSpec { nu, rates, start_count };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::domain(MODULE, format!("nu must lie in (0, 1], got {}", self.nu)));
        }
        if self.start_count < 1 {
            return Err(Error::domain(MODULE, "start_count must be at least 1"));
        }
        if let Some(s) = self.rates.support_max() {
            if self.start_count > s {
                return Err(Error::domain(
                    MODULE,
                    format!("start_count {} lies beyond the absorbing state {s}", self.start_count),
                ));
            }
        }
        self.rates.validate_up_to(self.start_count)
    }

    /// `λ_n` (zero at the absorbing state).
    pub fn rate(&self, n: u64) -> f64 {
        self.rates.rate(n)
    }

    /// Largest state that matters for sizes up to `n_max`.
    pub fn top_state(&self, n_max: u64) -> u64 {
        self.rates.support_max().map_or(n_max, |s| n_max.min(s))
    }

    /// `[λ_k, ..., λ_top]` for `k = start_count`.
    pub(crate) fn rates_from_start(&self, top: u64) -> Vec<f64> {
        (self.start_count..=top).map(|n| self.rate(n)).collect()
    }
}

/// Route selection for [`state_pmf_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PmfMethod {
    /// Closed forms where available, partial fractions under the monitor,
    /// contour inversion when the monitor trips or rates repeat.
    #[default]
    Auto,
    /// Partial fractions only; errors instead of falling back.
    PartialFraction,
    /// Contour inversion of the product-form transform.
    Contour,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PmfOptions {
    pub method: PmfMethod,
    pub policy: EvalPolicy,
}

fn precision_error(m: &Monitored) -> Error {
    Error::Precision {
        module: MODULE,
        lost_digits: if m.lost_digits.is_finite() { m.lost_digits } else { f64::MAX },
        budget: LOST_DIGITS_BUDGET,
        advice: PRECISION_ADVICE,
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(MODULE, format!("t must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// `P(𝔑^ν(t) = n)` for `start_count ≤ n ≤ n_max`.
pub fn state_pmf(spec: &ProcessSpec, t: f64, n_max: u64) -> Result<Pmf> {
    state_pmf_with(spec, t, n_max, &PmfOptions::default())
}

pub fn state_pmf_with(spec: &ProcessSpec, t: f64, n_max: u64, opts: &PmfOptions) -> Result<Pmf> {
    spec.validate()?;
    check_time(t)?;
    opts.policy.validate()?;
    let k = spec.start_count;
    if n_max < k {
        return Err(Error::domain(MODULE, format!("n_max = {n_max} is below start_count = {k}")));
    }
    let top = spec.top_state(n_max);
    spec.rates.validate_up_to(top)?;
    let pmf = if t == 0.0 {
        Pmf::point_mass(k, n_max, "point_mass")
    } else {
        let probs = match opts.method {
            PmfMethod::Contour => (contour_states(spec.nu, &spec.rates_from_start(top), t, 0.0, false), "contour"),
            PmfMethod::PartialFraction => (partial_fraction_states(spec, t, top, &opts.policy, false)?, "partial_fraction"),
            PmfMethod::Auto => auto_states(spec, t, top, &opts.policy)?,
        };
        let (mut p, method) = probs;
        p.resize((n_max - k + 1) as usize, 0.0);
        Pmf::new(k, p, method)
    };
    let pmf = pmf.clamp_negatives();
    let tail = if spec.rates.support_max().is_some_and(|s| n_max >= s) {
        0.0
    } else {
        1.0 - pmf.total()
    };
    Ok(pmf.with_tail(tail))
}

fn auto_states(spec: &ProcessSpec, t: f64, top: u64, policy: &EvalPolicy) -> Result<(Vec<f64>, &'static str)> {
    if let Some(lambda) = spec.rates.linear_slope() {
        if spec.nu == 1.0 {
            return Ok((negative_binomial(lambda, spec.start_count, t, top), "negative_binomial"));
        }
        return Ok(linear_alternating(spec, lambda, t, top, policy));
    }
    match partial_fraction_states(spec, t, top, policy, true) {
        Ok(p) if p.len() as u64 == top - spec.start_count + 1 => Ok((p, "partial_fraction")),
        Ok(p) => Ok((complete_by_contour(spec, t, top, p), "partial_fraction+contour")),
        Err(_) => Ok((contour_states(spec.nu, &spec.rates_from_start(top), t, 0.0, false), "contour")),
    }
}

fn complete_by_contour(spec: &ProcessSpec, t: f64, top: u64, mut head: Vec<f64>) -> Vec<f64> {
    let c = contour_states(spec.nu, &spec.rates_from_start(top), t, 0.0, false);
    let done = head.len();
    head.extend_from_slice(&c[done..]);
    head
}

/// `C(n−1, k−1) e^{−kλt} (1 − e^{−λt})^{n−k}`.
fn negative_binomial(lambda: f64, k: u64, t: f64, top: u64) -> Vec<f64> {
    let ln_q = (-(-lambda * t).exp_m1()).ln();
    (k..=top)
        .map(|n| (ln_binomial(n - 1, k - 1) - k as f64 * lambda * t + (n - k) as f64 * ln_q).exp())
        .collect()
}

/// `C(n−1, k−1) Σ_{m=k}^n C(n−k, m−k) (−1)^{m−k} E_ν(−λ m t^ν)` under the
/// monitor, contour for the states after the first trip.
fn linear_alternating(spec: &ProcessSpec, lambda: f64, t: f64, top: u64, policy: &EvalPolicy) -> (Vec<f64>, &'static str) {
    let k = spec.start_count;
    let inner = policy.tightened(INNER_TOL);
    let tnu = t.powf(spec.nu);
    let mut e = Vec::new();
    let mut out = Vec::new();
    for n in k..=top {
        match mittag_leffler(spec.nu, -lambda * n as f64 * tnu, &inner) {
            Ok(v) => e.push(v),
            Err(_) => break,
        }
        let ln_lead = ln_binomial(n - 1, k - 1);
        let big = n - k;
        let mut ln_c = 0.0;
        let mut weights = Vec::with_capacity(big as usize + 1);
        for j in 0..=big {
            if j > 0 {
                ln_c += ((big - j + 1) as f64).ln() - (j as f64).ln();
            }
            weights.push(SignedLog {
                sign: if j % 2 == 0 { 1 } else { -1 },
                ln_abs: ln_lead + ln_c,
            });
        }
        let m = monitored_sum(0.0, 1.0, &weights, &e, inner.target_abs_tol);
        if !m.trusted() {
            break;
        }
        out.push(m.value);
    }
    if out.len() as u64 == top - k + 1 {
        (out, "gengeo")
    } else {
        (complete_by_contour(spec, t, top, out), "gengeo+contour")
    }
}

/// Partial-fraction state probabilities. With `partial = true` stops at the
/// first untrusted state and returns the trusted prefix; otherwise a trip is
/// a precision error. Repeated rates are a routing error either way.
fn partial_fraction_states(spec: &ProcessSpec, t: f64, top: u64, policy: &EvalPolicy, partial: bool) -> Result<Vec<f64>> {
    let lambdas = spec.rates_from_start(top);
    let collisions = find_collisions(&lambdas, spec.start_count);
    if let Some(&(i, j)) = collisions.first() {
        return Err(Error::routing(
            MODULE,
            format!("partial fractions need distinct rates, but lambda_{i} = lambda_{j}; use the contour route"),
        ));
    }
    let inner = policy.tightened(INNER_TOL);
    let tnu = t.powf(spec.nu);
    let mut weights = PfWeights::new(lambdas[0]);
    let mut e = Vec::with_capacity(lambdas.len());
    let mut out = Vec::with_capacity(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        if i > 0 {
            weights.push(l);
        }
        match mittag_leffler(spec.nu, -l * tnu, &inner) {
            Ok(v) => e.push(v),
            Err(_) if partial => break,
            Err(err) => return Err(err),
        }
        let m = monitored_sum(0.0, 1.0, weights.weights(), &e, inner.target_abs_tol);
        if !m.trusted() {
            if partial {
                break;
            }
            return Err(precision_error(&m));
        }
        out.push(m.value);
    }
    Ok(out)
}

fn check_laplace_args(spec: &ProcessSpec, z: f64, n: u64) -> Result<()> {
    spec.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain(MODULE, format!("z must be positive, got {z}")));
    }
    if n < spec.start_count {
        return Err(Error::domain(MODULE, format!("n = {n} is below start_count = {}", spec.start_count)));
    }
    Ok(())
}

/// `z^{ν−1} Π_{k≤r<n} λ_r / Π_{k≤r≤n} (z^ν + λ_r)`; zero beyond the absorbing state.
pub fn state_laplace(spec: &ProcessSpec, z: f64, n: u64) -> Result<f64> {
    check_laplace_args(spec, z, n)?;
    if spec.rates.support_max().is_some_and(|s| n > s) {
        return Ok(0.0);
    }
    let zn = z.powf(spec.nu);
    let mut acc = CancellationMonitor::new();
    acc.add((spec.nu - 1.0) * z.ln());
    for r in spec.start_count..n {
        acc.add(spec.rate(r).ln());
    }
    for r in spec.start_count..=n {
        acc.add(-(zn + spec.rate(r)).ln());
    }
    Ok(acc.value().exp())
}

/// Partial-fraction form `Σ_m w_m z^{ν−1}/(z^ν + λ_m)` of [`state_laplace`];
/// needs distinct rates.
pub fn state_laplace_partial_fraction(spec: &ProcessSpec, z: f64, n: u64) -> Result<f64> {
    check_laplace_args(spec, z, n)?;
    let lambdas = spec.rates_from_start(spec.top_state(n));
    if n > spec.start_count + lambdas.len() as u64 - 1 {
        return Ok(0.0);
    }
    if let Some(&(i, j)) = find_collisions(&lambdas, spec.start_count).first() {
        return Err(Error::routing(MODULE, format!("lambda_{i} = lambda_{j}: partial fractions undefined")));
    }
    let mut w = PfWeights::new(lambdas[0]);
    lambdas[1..].iter().for_each(|&l| w.push(l));
    let zn = z.powf(spec.nu);
    let zp = z.powf(spec.nu - 1.0);
    let values: Vec<f64> = lambdas.iter().map(|l| zp / (zn + l)).collect();
    Ok(monitored_sum(0.0, 1.0, w.weights(), &values, 0.0).value)
}

/// Expected population together with the truncation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub value: f64,
    /// Magnitude of the last bracket `P(𝔑 > k)` that was added.
    pub last_term: f64,
    /// Number of brackets summed.
    pub terms: u64,
    pub method: &'static str,
}

/// Brackets below this size count as negligible for the stopping rule.
pub const MEAN_TAIL_TOL: f64 = 1e-10;

/// `𝔼𝔑^ν(t) = k + Σ_{j≥k} P(𝔑^ν(t) > j)` with each tail probability written
/// as `1 − Σ_m d_m E_ν(−λ_m t^ν)`. Stops after two consecutive brackets
/// below [`MEAN_TAIL_TOL`], at `k_max`, or at the absorbing state.
pub fn mean(spec: &ProcessSpec, t: f64, k_max: u64) -> Result<MeanEstimate> {
    mean_with(spec, t, k_max, &PmfOptions::default())
}

pub fn mean_with(spec: &ProcessSpec, t: f64, k_max: u64, opts: &PmfOptions) -> Result<MeanEstimate> {
    spec.validate()?;
    check_time(t)?;
    opts.policy.validate()?;
    let k = spec.start_count;
    if t == 0.0 {
        return Ok(MeanEstimate {
            value: k as f64,
            last_term: 0.0,
            terms: 0,
            method: "initial",
        });
    }
    // brackets j = k..=last; beyond the absorbing state they vanish
    let last = match spec.rates.support_max() {
        Some(s) => k_max.min(s - 1),
        None => k_max,
    };
    if last < k {
        return Ok(MeanEstimate {
            value: k as f64,
            last_term: 0.0,
            terms: 0,
            method: "absorbed",
        });
    }
    spec.rates.validate_up_to(last)?;
    let lambdas = spec.rates_from_start(last);
    if opts.method != PmfMethod::Contour {
        match mean_partial_fraction(spec, t, &lambdas, &opts.policy) {
            Ok(est) => return Ok(est),
            Err(e) if opts.method == PmfMethod::PartialFraction => return Err(e),
            Err(_) => {}
        }
    }
    let tails = contour_tails(spec.nu, &lambdas, t, 0.0, false);
    Ok(accumulate_tails(k, tails.into_iter().map(|v| v.clamp(0.0, 1.0)), "contour"))
}

fn accumulate_tails(k: u64, tails: impl Iterator<Item = f64>, method: &'static str) -> MeanEstimate {
    let mut acc = CancellationMonitor::new();
    acc.add(k as f64);
    let mut small_run = 0;
    let mut last_term = 0.0;
    let mut terms = 0;
    for b in tails {
        acc.add(b);
        last_term = b.abs();
        terms += 1;
        small_run = if last_term < MEAN_TAIL_TOL { small_run + 1 } else { 0 };
        if small_run >= 2 {
            break;
        }
    }
    MeanEstimate {
        value: acc.value(),
        last_term,
        terms,
        method,
    }
}

fn mean_partial_fraction(spec: &ProcessSpec, t: f64, lambdas: &[f64], policy: &EvalPolicy) -> Result<MeanEstimate> {
    if let Some(&(i, j)) = find_collisions(lambdas, spec.start_count).first() {
        return Err(Error::routing(MODULE, format!("mean needs distinct rates, but lambda_{i} = lambda_{j}")));
    }
    let inner = policy.tightened(INNER_TOL);
    let tnu = t.powf(spec.nu);
    let mut weights = TailWeights::default();
    let mut e = Vec::with_capacity(lambdas.len());
    let mut brackets = Vec::with_capacity(lambdas.len());
    let mut small_run = 0;
    for &l in lambdas {
        weights.push(l);
        e.push(mittag_leffler(spec.nu, -l * tnu, &inner)?);
        let m = monitored_sum(1.0, -1.0, weights.weights(), &e, inner.target_abs_tol);
        if !m.trusted() {
            return Err(precision_error(&m));
        }
        brackets.push(m.value);
        small_run = if m.value.abs() < MEAN_TAIL_TOL { small_run + 1 } else { 0 };
        if small_run >= 2 {
            break;
        }
    }
    Ok(accumulate_tails(spec.start_count, brackets.into_iter(), "partial_fraction"))
}

/// Density `λ_k s^{ν−1} E_{ν,ν}(−λ_k s^ν)` of the sojourn in state `k`.
pub fn waiting_time_density(spec: &ProcessSpec, k: u64, s: f64) -> Result<f64> {
    spec.validate()?;
    if k < 1 {
        return Err(Error::domain(MODULE, "states are numbered from 1"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(MODULE, format!("s must be positive, got {s}")));
    }
    let l = spec.rate(k);
    if l == 0.0 {
        return Ok(0.0);
    }
    if spec.nu == 1.0 {
        return Ok(l * (-l * s).exp());
    }
    let policy = EvalPolicy::default();
    let sn = s.powf(spec.nu);
    let e = mittag_leffler_two_param(spec.nu, spec.nu, -l * sn, &policy)?;
    Ok((l * sn / s * e).max(0.0))
}
