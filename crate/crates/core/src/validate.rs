//! Numerical checks tying the state probabilities back to the equations that
//! define them: the fractional forward equations (through an L1 Caputo
//! discretisation) and their Laplace transforms (through quadrature).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnbp::{state_laplace, state_pmf, ProcessSpec};
use crate::numerics::quad::{integrate_pieces, QuadOptions};
use crate::specfun::rgamma;

const MODULE: &str = "validate";

/// Grid points closer than this many steps to the origin cannot be certified.
pub const MIN_STEPS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub nu: f64,
    pub n: u64,
    pub step: f64,
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    pub tolerance_used: f64,
    pub status: ResidualStatus,
}

/// L1 discretisation of the Caputo derivative of order `ν ∈ (0, 1)` on the
/// grid `0, h, 2h, ...`:
/// `D^ν u(t_k) ≈ h^{−ν}/Γ(2−ν) Σ_{j<k} b_j (u_{k−j} − u_{k−j−1})`,
/// `b_j = (j+1)^{1−ν} − j^{1−ν}`.
#[derive(Debug, Clone)]
pub struct L1Caputo {
    weights: Vec<f64>,
    pre: f64,
}

impl L1Caputo {
    pub fn new(nu: f64, step: f64, k_max: usize) -> Self {
        let weights = (0..k_max)
            .map(|j| ((j + 1) as f64).powf(1.0 - nu) - (j as f64).powf(1.0 - nu))
            .collect();
        L1Caputo {
            weights,
            pre: step.powf(-nu) * rgamma(2.0 - nu),
        }
    }

    /// Derivative at node `k` from samples `u[0..=k]`.
    pub fn at(&self, u: &[f64], k: usize) -> f64 {
        self.pre * (0..k).map(|j| self.weights[j] * (u[k - j] - u[k - j - 1])).sum::<f64>()
    }
}

/// Residual of `D^ν p_n + λ_n p_n − λ_{n−1} p_{n−1} = 0` at the points of
/// `t_grid`, which must be multiples of `step`.
///
/// For `ν < 1` the Caputo derivative uses the L1 scheme on the uniform grid
/// `0, step, 2·step, ...`; for `ν = 1` it is the central difference.
pub fn caputo_residual(
    spec: &ProcessSpec,
    n: u64,
    t_grid: &[f64],
    step: f64,
    tolerance: f64,
) -> Result<ResidualReport> {
    spec.validate()?;
    if !(step > 0.0 && step.is_finite()) || !(tolerance > 0.0) {
        return Err(Error::domain(MODULE, "step and tolerance must be positive"));
    }
    if n < spec.start_count {
        return Err(Error::domain(MODULE, format!("state {n} lies below the initial state")));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::domain(MODULE, "t_grid must be positive and increasing"));
    }
    let mut idx = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = (t / step).round();
        if (t / step - k).abs() > 1e-6 * k.max(1.0) {
            return Err(Error::domain(MODULE, format!("grid point {t} is not a multiple of step {step}")));
        }
        idx.push(k as u64);
    }
    let nu = spec.nu;
    let k_max = *idx.last().unwrap() + u64::from(nu == 1.0);

    // p_{n−1} and p_n at every grid node
    let mut cur = Vec::with_capacity(k_max as usize + 1);
    let mut prev = Vec::with_capacity(k_max as usize + 1);
    for j in 0..=k_max {
        let pmf = state_pmf(spec, j as f64 * step, n)?;
        cur.push(pmf.prob(n));
        prev.push(if n > spec.start_count { pmf.prob(n - 1) } else { 0.0 });
    }
    let lam_n = spec.rate(n);
    let lam_prev = if n > spec.start_count { spec.rate(n - 1) } else { 0.0 };

    let l1 = L1Caputo::new(nu, step, k_max as usize);

    let mut residuals = Vec::with_capacity(idx.len());
    for &k in &idx {
        let k = k as usize;
        let deriv = if nu == 1.0 {
            (cur[k + 1] - cur[k - 1]) / (2.0 * step)
        } else {
            l1.at(&cur, k)
        };
        residuals.push(deriv + lam_n * cur[k] - lam_prev * prev[k]);
    }
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let status = if idx[0] < MIN_STEPS {
        ResidualStatus::Inconclusive
    } else if max_abs_residual <= tolerance {
        ResidualStatus::Pass
    } else {
        ResidualStatus::Fail
    };
    Ok(ResidualReport {
        nu,
        n,
        step,
        grid: t_grid.to_vec(),
        residuals,
        max_abs_residual,
        tolerance_used: tolerance,
        status,
    })
}

/// `max residual(step) / max residual(step / 2)`.
pub fn refinement_factor(spec: &ProcessSpec, n: u64, t_grid: &[f64], step: f64) -> Result<f64> {
    let coarse = caputo_residual(spec, n, t_grid, step, f64::MAX)?;
    let fine = caputo_residual(spec, n, t_grid, step / 2.0, f64::MAX)?;
    Ok(coarse.max_abs_residual / fine.max_abs_residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub z: f64,
    pub n: u64,
    /// `∫_0^{t_cut} e^{−zt} p_n(t) dt`.
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// Bound `e^{−z t_cut}/z` on the neglected integral.
    pub tail_bound: f64,
    pub analytic: f64,
    pub rel_error: f64,
}

/// Compares numerical quadrature of `e^{−zt} p_n(t)` with the product-form
/// Laplace transform.
pub fn laplace_quadrature_check(spec: &ProcessSpec, z: f64, n: u64, t_cut: f64) -> Result<LaplaceCheck> {
    if !(z > 0.0 && z.is_finite()) || !(t_cut > 0.0 && t_cut.is_finite()) {
        return Err(Error::domain(MODULE, "z and t_cut must be positive and finite"));
    }
    let analytic = state_laplace(spec, z, n)?;
    let mut breaks = vec![0.0];
    let mut b = 1e-8;
    while b < t_cut {
        breaks.push(b);
        b *= if b < 1.0 { 10.0 } else { 2.0 };
    }
    breaks.push(t_cut);
    let mut failure = None;
    let r = integrate_pieces(
        |t| match state_pmf(spec, t, n) {
            Ok(p) => (-z * t).exp() * p.prob(n),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &breaks,
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    let rel_error = if analytic != 0.0 {
        (r.value - analytic).abs() / analytic.abs()
    } else {
        r.value.abs()
    };
    Ok(LaplaceCheck {
        z,
        n,
        quadrature: r.value,
        quadrature_error: r.error_estimate,
        tail_bound: (-z * t_cut).exp() / z,
        analytic,
        rel_error,
    })
}
