//! Globally adaptive Gauss–Kronrod (10/21) quadrature on finite intervals.
//!
//! Both a scalar and a vector-valued driver are provided; the vector form
//! integrates every component on a shared subdivision and measures error in
//! the max norm, which is what the PMF-valued integrals need.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_segment<F>(f: &mut F, dim: usize, a: f64, b: f64, scratch: &mut [f64]) -> Segment
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, scratch);
    for i in 0..dim {
        kronrod[i] += WGK[10] * scratch[i];
    }
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        for &point in &[center - dx, center + dx] {
            f(point, scratch);
            for i in 0..dim {
                kronrod[i] += wk * scratch[i];
                if j % 2 == 1 {
                    gauss[i] += WG[j / 2] * scratch[i];
                }
            }
        }
    }
    let mut error = 0.0_f64;
    for i in 0..dim {
        kronrod[i] *= half;
        gauss[i] *= half;
        error = error.max((kronrod[i] - gauss[i]).abs());
    }
    Segment {
        a,
        b,
        value: kronrod,
        error,
    }
}

/// Integrates a vector-valued function over `[a, b]`.
///
/// `f(x, out)` must fill `out` (length `dim`) with the integrand at `x`.
/// Convergence is declared when the summed error estimate drops below
/// `max(abs_tol, rel_tol * max_i |I_i|)`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<Vec<f64>>>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("quadrature", "integration bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: vec![0.0; dim],
            error_estimate: 0.0,
            intervals: 0,
        });
    }
    let mut scratch = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let first = kronrod_segment(&mut f, dim, a, b, &mut scratch);
    let mut total = first.value.clone();
    let mut total_error = first.error;
    heap.push(first);

    loop {
        let magnitude = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * magnitude);
        if total_error <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            // Accept a result that sits at the rounding floor of the integrand.
            if total_error <= 1e3 * f64::EPSILON * magnitude.max(f64::MIN_POSITIVE) {
                break;
            }
            return Err(Error::Quadrature {
                module: "quadrature",
                message: format!(
                    "error estimate {total_error:.3e} above target {target:.3e} after {} intervals",
                    heap.len()
                ),
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            if total_error <= 1e3 * f64::EPSILON * magnitude.max(f64::MIN_POSITIVE) {
                break;
            }
            return Err(Error::Quadrature {
                module: "quadrature",
                message: "interval exhausted floating-point resolution".into(),
            });
        }
        let left = kronrod_segment(&mut f, dim, worst.a, mid, &mut scratch);
        let right = kronrod_segment(&mut f, dim, mid, worst.b, &mut scratch);
        for i in 0..dim {
            total[i] += left.value[i] + right.value[i] - worst.value[i];
        }
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from the segments to shed the drift of the running updates.
    let mut value = vec![0.0; dim];
    let mut error = 0.0;
    let intervals = heap.len();
    for seg in heap.into_vec() {
        for i in 0..dim {
            value[i] += seg.value[i];
        }
        error += seg.error;
    }
    Ok(QuadResult {
        value,
        error_estimate: error,
        intervals,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<f64>>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, opts)?;
    Ok(QuadResult {
        value: r.value[0],
        error_estimate: r.error_estimate,
        intervals: r.intervals,
    })
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...` and sums.
pub fn integrate_pieces<F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult<f64>>
where
    F: FnMut(f64) -> f64,
{
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut intervals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let r = integrate(&mut f, w[0], w[1], opts)?;
            value += r.value;
            error_estimate += r.error_estimate;
            intervals += r.intervals;
        }
    }
    Ok(QuadResult {
        value,
        error_estimate,
        intervals,
    })
}
