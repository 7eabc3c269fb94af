//! Finite probability vectors over consecutive integer sizes.

use serde::{Deserialize, Serialize};

/// Probabilities of sizes `support_min, support_min + 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub support_min: u64,
    pub probs: Vec<f64>,
    /// Mass beyond the last listed size, when known.
    pub truncation_tail_bound: Option<f64>,
    /// Short tag naming the formula or route that produced the values.
    pub method: String,
}

impl Pmf {
    pub fn new(support_min: u64, probs: Vec<f64>, method: impl Into<String>) -> Self {
        Pmf {
            support_min,
            probs,
            truncation_tail_bound: None,
            method: method.into(),
        }
    }

    pub fn point_mass(at: u64, n_max: u64, method: impl Into<String>) -> Self {
        let mut probs = vec![0.0; (n_max - at + 1) as usize];
        probs[0] = 1.0;
        Pmf {
            support_min: at,
            probs,
            truncation_tail_bound: Some(0.0),
            method: method.into(),
        }
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.truncation_tail_bound = Some(tail.max(0.0));
        self
    }

    /// Largest listed size.
    pub fn n_max(&self) -> u64 {
        self.support_min + self.probs.len() as u64 - 1
    }

    /// `P(n)`, zero outside the listed range.
    pub fn prob(&self, n: u64) -> f64 {
        if n < self.support_min {
            return 0.0;
        }
        self.probs.get((n - self.support_min) as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.support_min + i as u64, *p))
    }

    pub fn total(&self) -> f64 {
        let mut s = crate::numerics::CancellationMonitor::new();
        self.probs.iter().for_each(|p| s.add(*p));
        s.value()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(n, p)| n as f64 * p).sum()
    }

    /// Clamps round-off negatives (down to -1e-12) to zero.
    pub fn clamp_negatives(mut self) -> Self {
        for p in &mut self.probs {
            if *p < 0.0 && *p >= -1e-12 {
                *p = 0.0;
            }
        }
        self
    }

    /// Total variation distance `½ Σ |p − q|` over the union of supports,
    /// with any known tail mass treated as one extra cell.
    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        let lo = self.support_min.min(other.support_min);
        let hi = self.n_max().max(other.n_max());
        let mut d = 0.0;
        for n in lo..=hi {
            d += (self.prob(n) - other.prob(n)).abs();
        }
        let ta = self.truncation_tail_bound.unwrap_or(0.0);
        let tb = other.truncation_tail_bound.unwrap_or(0.0);
        d += (ta - tb).abs();
        (0.5 * d).min(1.0)
    }
}
