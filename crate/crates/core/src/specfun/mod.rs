//! Scalar special functions: gamma family, Mittag-Leffler functions and
//! incomplete Laplace transforms of `E_ν`.

mod gamma;
mod laplace;
mod mittag_leffler;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gamma::{
    inc_beta, log_gamma, lower_inc_gamma_reg, pochhammer, pochhammer_parts, rgamma, rgamma_signed,
    upper_inc_gamma_reg,
};
pub(crate) use gamma::ln_binomial;
pub use laplace::{
    ml_laplace_full, ml_laplace_lower, ml_laplace_lower_series, ml_laplace_upper, ml_laplace_upper_series,
};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_two_param, mittag_leffler_with_regime, Regime};

const MODULE: &str = "specfun";

/// Accuracy and regime controls for Mittag-Leffler evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPolicy {
    /// Largest `|z|` handled by the power series.
    pub series_cutoff: f64,
    pub target_abs_tol: f64,
    pub max_terms: usize,
}

impl Default for EvalPolicy {
    fn default() -> Self {
        EvalPolicy {
            series_cutoff: 5.0,
            target_abs_tol: 1e-10,
            max_terms: 512,
        }
    }
}

impl EvalPolicy {
    pub fn new(series_cutoff: f64, target_abs_tol: f64, max_terms: usize) -> Result<Self> {
        let p = EvalPolicy {
            series_cutoff,
            target_abs_tol,
            max_terms,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0 && self.series_cutoff.is_finite()) {
            return Err(Error::domain(MODULE, "series_cutoff must be positive"));
        }
        if !(self.target_abs_tol > 0.0 && self.target_abs_tol <= 1e-6) {
            return Err(Error::domain(MODULE, "target_abs_tol must lie in (0, 1e-6]"));
        }
        if self.max_terms < 64 {
            return Err(Error::domain(MODULE, "max_terms must be at least 64"));
        }
        Ok(())
    }

    /// Same policy with a tighter tolerance; used where a sum amplifies
    /// the error of each evaluation.
    pub fn tightened(&self, tol: f64) -> Self {
        EvalPolicy {
            target_abs_tol: self.target_abs_tol.min(tol),
            ..*self
        }
    }
}

pub(crate) fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain(MODULE, format!("nu must lie in (0, 1], got {nu}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_validation() {
        assert!(EvalPolicy::default().validate().is_ok());
        assert!(EvalPolicy::new(5.0, 1e-5, 100).is_err());
        assert!(EvalPolicy::new(5.0, 1e-10, 10).is_err());
        assert!(EvalPolicy::new(0.0, 1e-10, 100).is_err());
    }
}
