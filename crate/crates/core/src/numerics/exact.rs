//! Exact dyadic arithmetic for re-summing alternating rational sums.
//!
//! Every finite `f64` is a dyadic rational `m · 2^e`. Sums, differences and
//! products of dyadics stay dyadic, so a sum of ratios of such expressions can
//! be accumulated exactly up to one fixed-point rounding per term.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "dyadic conversion of a non-finite value");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let mantissa = if exponent == 0 {
            (bits & 0xf_ffff_ffff_ffff) << 1
        } else {
            (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
        };
        Dyadic {
            mant: BigInt::from(mantissa) * sign,
            exp: exponent - 1075,
        }
    }

    pub fn from_u64(x: u64) -> Self {
        Dyadic {
            mant: BigInt::from(x),
            exp: 0,
        }
    }

    pub fn from_bigint(x: BigInt) -> Self {
        Dyadic { mant: x, exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.mant.sign()
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        (a, b, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Dyadic { mant: a + b, exp: e }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// `floor(self / den · 2^bits)` as an integer.
    pub fn fixed_div(&self, den: &Dyadic, bits: u32) -> BigInt {
        assert!(!den.is_zero(), "division by an exact zero");
        // self/den = (m1/m2) 2^{e1-e2}; scale the numerator by 2^{bits + e1 - e2}.
        let shift = bits as i64 + self.exp - den.exp;
        let (num, d) = if shift >= 0 {
            (&self.mant << (shift as usize), den.mant.clone())
        } else {
            (self.mant.clone(), &den.mant << ((-shift) as usize))
        };
        num / d
    }
}

/// Converts a fixed-point integer `v · 2^{-bits}` to the nearest-ish `f64`.
pub fn fixed_to_f64(v: &BigInt, bits: u32) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let len = v.bits() as i64;
    // Keep 64 leading bits, then rescale.
    let drop = (len - 64).max(0);
    let top = (v.abs() >> (drop as usize)).to_u64().unwrap_or(u64::MAX) as f64;
    let magnitude = scale_pow2(top, drop - bits as i64);
    if v.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `x · 2^e` without intermediate overflow or premature underflow.
fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Accumulates `Σ num_i / den_i` in fixed point with `bits` fractional bits.
#[derive(Debug, Clone)]
pub struct FixedSum {
    bits: u32,
    acc: BigInt,
    terms: usize,
}

impl FixedSum {
    pub fn new(bits: u32) -> Self {
        FixedSum {
            bits,
            acc: BigInt::zero(),
            terms: 0,
        }
    }

    pub fn add_ratio(&mut self, num: &Dyadic, den: &Dyadic) {
        self.acc += num.fixed_div(den, self.bits);
        self.terms += 1;
    }

    pub fn add_dyadic(&mut self, value: &Dyadic) {
        self.add_ratio(value, &Dyadic::from_u64(1));
    }

    pub fn value(&self) -> f64 {
        fixed_to_f64(&self.acc, self.bits)
    }

    /// Upper bound on the accumulated truncation error.
    pub fn error_bound(&self) -> f64 {
        self.terms as f64 * 2f64.powi(-(self.bits as i32))
    }
}

/// Fractional bits needed to keep `digits` significant decimal digits after
/// losing `lost_digits` to cancellation in a sum of terms bounded by
/// `10^{max_log10}`.
pub fn bits_for(lost_digits: f64, max_log10: f64, digits: f64) -> u32 {
    let need = (lost_digits.max(0.0) + digits + max_log10.max(0.0) + 4.0) * std::f64::consts::LOG2_10;
    need.ceil().clamp(64.0, 100_000.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip_is_exact() {
        for &x in &[1.0, -0.1, 3.5e-300, 1.7e308, 5e-324, 123456.789] {
            let d = Dyadic::from_f64(x);
            let back = d.fixed_div(&Dyadic::from_u64(1), 1100);
            assert_eq!(fixed_to_f64(&back, 1100), x);
        }
    }

    #[test]
    fn cancellation_is_exact() {
        // (1e20 + 1) - 1e20 = 1 exactly, which plain f64 loses.
        let a = Dyadic::from_f64(1e20);
        let s = a.add(&Dyadic::from_u64(1)).sub(&a);
        let mut sum = FixedSum::new(64);
        sum.add_dyadic(&s);
        assert_eq!(sum.value(), 1.0);
    }

    #[test]
    fn fixed_ratio_sum() {
        let mut s = FixedSum::new(200);
        for k in 1..=3u64 {
            s.add_ratio(&Dyadic::from_u64(1), &Dyadic::from_u64(k));
        }
        assert!((s.value() - 11.0 / 6.0).abs() < 1e-15);
    }
}
