//! Numerical building blocks shared by the analytic modules.

pub mod contour;
pub mod exact;
pub mod quad;

use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

/// A real number stored as a sign and the logarithm of its magnitude.
///
/// `sign == 0` marks an exact zero (for example a Pochhammer symbol with a
/// vanishing factor); `ln_abs` is then `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        ln_abs: 0.0,
    };
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_abs.exp()
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of an exact zero");
        SignedLog {
            sign: self.sign,
            ln_abs: -self.ln_abs,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

/// Neumaier-compensated running sum that also tracks the largest term, so
/// callers can estimate how many digits cancellation destroyed.
#[derive(Debug, Clone, Copy, Default)]
pub struct CancellationMonitor {
    sum: f64,
    comp: f64,
    max_term: f64,
}

impl CancellationMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
        self.max_term = self.max_term.max(term.abs());
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn max_term(&self) -> f64 {
        self.max_term
    }

    /// `log10(max |term| / |sum|)`; infinite when the sum vanishes.
    pub fn lost_digits(&self) -> f64 {
        let v = self.value().abs();
        if self.max_term == 0.0 {
            0.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            (self.max_term / v).log10().max(0.0)
        }
    }
}

/// Default budget of decimal digits an alternating sum may lose before the
/// caller must switch to a stable route.
pub const LOST_DIGITS_BUDGET: f64 = 6.0;
