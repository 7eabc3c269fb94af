//! Shared numerical kernels: partial-fraction weights, monitored sums and
//! contour inversion of the product-form transforms.

use num_complex::Complex64;

use crate::numerics::contour::ParabolicContour;
use crate::numerics::{CancellationMonitor, SignedLog, LOST_DIGITS_BUDGET};

/// Absolute error a monitored alternating sum may carry before the caller
/// must switch to a stable route.
pub(crate) const PF_ABS_TARGET: f64 = 1e-10;

/// Tolerance used for the special-function values inside alternating sums.
pub(crate) const INNER_TOL: f64 = 1e-13;

/// Partial-fraction weights, updated one state at a time:
/// `w_m = Π_{j=first}^{n-1} λ_j / Π_{l=first, l≠m}^{n} (λ_l − λ_m)`.
#[derive(Debug, Clone)]
pub(crate) struct PfWeights {
    lambdas: Vec<f64>,
    weights: Vec<SignedLog>,
}

impl PfWeights {
    pub fn new(first_rate: f64) -> Self {
        PfWeights {
            lambdas: vec![first_rate],
            weights: vec![SignedLog::ONE],
        }
    }

    pub fn weights(&self) -> &[SignedLog] {
        &self.weights
    }

    /// Extends from state `n` to `n + 1` with `λ_{n+1} = next`.
    pub fn push(&mut self, next: f64) {
        let last = *self.lambdas.last().expect("at least one rate");
        let ln_last = SignedLog::from_f64(last);
        // existing weights gain λ_n / (λ_{n+1} − λ_m)
        for (w, &lm) in self.weights.iter_mut().zip(self.lambdas.iter()) {
            *w = *w * ln_last / SignedLog::from_f64(next - lm);
        }
        let mut fresh = SignedLog::ONE;
        for &l in &self.lambdas {
            fresh = fresh * SignedLog::from_f64(l) / SignedLog::from_f64(l - next);
        }
        self.lambdas.push(next);
        self.weights.push(fresh);
    }
}

/// Tail weights `d_m = Π_{l≤k, l≠m} λ_l / (λ_l − λ_m)`, updated in `k`.
#[derive(Debug, Clone, Default)]
pub(crate) struct TailWeights {
    lambdas: Vec<f64>,
    weights: Vec<SignedLog>,
}

impl TailWeights {
    pub fn weights(&self) -> &[SignedLog] {
        &self.weights
    }

    pub fn push(&mut self, next: f64) {
        let ln_next = SignedLog::from_f64(next);
        for (w, &lm) in self.weights.iter_mut().zip(self.lambdas.iter()) {
            *w = *w * ln_next / SignedLog::from_f64(next - lm);
        }
        let mut fresh = SignedLog::ONE;
        for &l in &self.lambdas {
            fresh = fresh * SignedLog::from_f64(l) / SignedLog::from_f64(l - next);
        }
        self.lambdas.push(next);
        self.weights.push(fresh);
    }
}

/// Result of a monitored weighted sum `Σ w_m v_m` (plus an optional constant).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Monitored {
    pub value: f64,
    pub lost_digits: f64,
    pub abs_error: f64,
}

impl Monitored {
    pub fn trusted(&self) -> bool {
        self.trusted_within(PF_ABS_TARGET)
    }

    pub fn trusted_within(&self, abs_target: f64) -> bool {
        self.lost_digits <= LOST_DIGITS_BUDGET && self.abs_error <= abs_target
    }
}

/// `constant + scale · Σ w_m v_m`, where each `v_m` carries absolute error
/// `value_err`.
pub(crate) fn monitored_sum(constant: f64, scale: f64, weights: &[SignedLog], values: &[f64], value_err: f64) -> Monitored {
    let mut mon = CancellationMonitor::new();
    if constant != 0.0 {
        mon.add(constant);
    }
    let mut abs_weights = 0.0;
    let mut abs_terms = 0.0;
    for (w, v) in weights.iter().zip(values) {
        let wf = scale * w.to_f64();
        let term = wf * v;
        abs_weights += wf.abs();
        abs_terms += term.abs();
        mon.add(term);
    }
    let value = mon.value();
    Monitored {
        value,
        lost_digits: mon.lost_digits(),
        abs_error: abs_weights * value_err + 8.0 * f64::EPSILON * (abs_terms + constant.abs()),
    }
}

fn z_pow(z: Complex64, nu: f64) -> Complex64 {
    if nu == 1.0 {
        z
    } else {
        z.powf(nu)
    }
}

/// Inverts the state-probability transforms
/// `L_n(w) = w^{ν−1} Π_{first≤r<n} λ_r / Π_{first≤r≤n} (w^ν + λ_r)`
/// for every state listed in `lambdas` (which starts at the initial state).
///
/// With `shift = β` and `integrate = true` the result is instead
/// `∫_0^t e^{−βy} p_n(y) dy`, whose transform in `t` is `L_n(z + β)/z`.
pub(crate) fn contour_states(nu: f64, lambdas: &[f64], t: f64, shift: f64, integrate: bool) -> Vec<f64> {
    let dim = lambdas.len();
    ParabolicContour::default().invert_vec(
        |z, out: &mut [Complex64]| {
            let w = z + shift;
            let s = z_pow(w, nu);
            let mut cur = z_pow(w, nu) / w / (s + lambdas[0]);
            if integrate {
                cur /= z;
            }
            out[0] = cur;
            for i in 1..dim {
                cur = cur * lambdas[i - 1] / (s + lambdas[i]);
                out[i] = cur;
            }
        },
        dim,
        t,
    )
}

/// Inverts the tail transforms `T_k(w) = w^{−1} Π_{r≤k} λ_r/(w^ν + λ_r)`,
/// i.e. `P(𝔑(t) > k)` for `k = 1..=lambdas.len()` (start at one).
/// `shift`/`integrate` act as in [`contour_states`].
pub(crate) fn contour_tails(nu: f64, lambdas: &[f64], t: f64, shift: f64, integrate: bool) -> Vec<f64> {
    let dim = lambdas.len();
    ParabolicContour::default().invert_vec(
        |z, out: &mut [Complex64]| {
            let w = z + shift;
            let s = z_pow(w, nu);
            let mut cur = Complex64::new(1.0, 0.0) / w;
            if integrate {
                cur /= z;
            }
            for i in 0..dim {
                cur = cur * lambdas[i] / (s + lambdas[i]);
                out[i] = cur;
            }
        },
        dim,
        t,
    )
}
