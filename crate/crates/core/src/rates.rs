//! Birth-rate sequences `λ_1, λ_2, ...` for the in-link process.
//!
//! A sequence either grows without bound (linear, generated) or saturates
//! at a threshold `N` with `λ_N = 0`, making `N` absorbing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODULE: &str = "rates";

/// Relative tolerance under which two rates count as equal.
pub const DISTINCT_REL_TOL: f64 = 1e-12;

/// Rate generator for custom unbounded sequences.
#[derive(Clone)]
pub struct RateFn(pub Arc<dyn Fn(u64) -> f64 + Send + Sync>);

impl fmt::Debug for RateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RateFn(..)")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateKind {
    /// `λ_r = λ r`.
    Linear { lambda: f64 },
    /// `λ_j = η (j/N)^{ω₁} ((N−j)/N)^{ω₂} = λ j^{ω₁} (N−j)^{ω₂}`, `λ = η/N^{ω₁+ω₂}`.
    Saturating {
        eta: f64,
        omega1: f64,
        omega2: f64,
        n: u64,
    },
    /// `base` for `k < cutoff`, zero from `cutoff` on.
    Truncated { base: Box<RateSequence>, cutoff: u64 },
    /// Explicit `λ_1..λ_L`; state `L + 1` is absorbing.
    Custom { values: Vec<f64> },
    /// Generator with a declared bound `λ_k ≤ growth_bound · k`, which
    /// certifies non-explosion. Not serializable.
    #[serde(skip)]
    Generated { rate: RateFn, growth_bound: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSequence {
    #[serde(flatten)]
    kind: RateKind,
}

/// Outcome of [`RateSequence::check_distinct`]; pairs are 1-based indices `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctReport {
    pub distinct: bool,
    pub collisions: Vec<(u64, u64)>,
}

pub fn make_linear(lambda: f64) -> Result<RateSequence> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(MODULE, format!("linear rate must be positive, got {lambda}")));
    }
    Ok(RateSequence {
        kind: RateKind::Linear { lambda },
    })
}

pub fn make_saturating(eta: f64, omega1: f64, omega2: f64, n: u64) -> Result<RateSequence> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(MODULE, format!("eta must be positive, got {eta}")));
    }
    if !(omega1 >= 0.0 && omega1.is_finite()) {
        return Err(Error::domain(MODULE, format!("omega1 must be >= 0, got {omega1}")));
    }
    if omega2 == 0.0 {
        return Err(Error::domain(
            MODULE,
            "omega2 = 0 gives unbounded growth and is excluded from the saturating family",
        ));
    }
    if !(omega2 > 0.0 && omega2.is_finite()) {
        return Err(Error::domain(MODULE, format!("omega2 must be > 0, got {omega2}")));
    }
    if n < 2 {
        return Err(Error::domain(MODULE, format!("saturation threshold N must be >= 2, got {n}")));
    }
    Ok(RateSequence {
        kind: RateKind::Saturating { eta, omega1, omega2, n },
    })
}

/// Saturating family from its reduced scale: `λ_j = lam · j^{ω₁} (N−j)^{ω₂}`.
pub fn make_saturating_scaled(lam: f64, omega1: f64, omega2: f64, n: u64) -> Result<RateSequence> {
    let eta = lam * (n as f64).powf(omega1 + omega2);
    make_saturating(eta, omega1, omega2, n)
}

/// First saturation example: `λ_j = lam (N − j)`.
pub fn make_s1(lam: f64, n: u64) -> Result<RateSequence> {
    make_saturating_scaled(lam, 0.0, 1.0, n)
}

/// Second saturation example: `λ_j = lam j (N − j)`.
pub fn make_s2(lam: f64, n: u64) -> Result<RateSequence> {
    make_saturating_scaled(lam, 1.0, 1.0, n)
}

pub fn make_truncated(base: RateSequence, cutoff: u64) -> Result<RateSequence> {
    if cutoff < 2 {
        return Err(Error::domain(MODULE, format!("cutoff must be >= 2, got {cutoff}")));
    }
    if let Some(s) = base.support_max() {
        if cutoff > s {
            return Err(Error::domain(
                MODULE,
                format!("cutoff {cutoff} exceeds the base support {s}"),
            ));
        }
    }
    base.validate_up_to(cutoff - 1)?;
    Ok(RateSequence {
        kind: RateKind::Truncated {
            base: Box::new(base),
            cutoff,
        },
    })
}

pub fn make_custom(values: Vec<f64>) -> Result<RateSequence> {
    if values.is_empty() {
        return Err(Error::domain(MODULE, "custom rate list is empty"));
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(
            MODULE,
            format!("custom rate lambda_{} = {v} is not a positive finite number", i + 1),
        ));
    }
    Ok(RateSequence {
        kind: RateKind::Custom { values },
    })
}

pub fn make_generated<F>(rate: F, growth_bound: f64) -> Result<RateSequence>
where
    F: Fn(u64) -> f64 + Send + Sync + 'static,
{
    if !(growth_bound > 0.0 && growth_bound.is_finite()) {
        return Err(Error::domain(MODULE, "growth bound must be positive and finite"));
    }
    Ok(RateSequence {
        kind: RateKind::Generated {
            rate: RateFn(Arc::new(rate)),
            growth_bound,
        },
    })
}

impl RateSequence {
    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    /// Largest reachable state, `None` when unbounded.
    pub fn support_max(&self) -> Option<u64> {
        match &self.kind {
            RateKind::Linear { .. } | RateKind::Generated { .. } => None,
            RateKind::Saturating { n, .. } => Some(*n),
            RateKind::Truncated { cutoff, .. } => Some(*cutoff),
            RateKind::Custom { values } => Some(values.len() as u64 + 1),
        }
    }

    /// `λ_k` for `k ≥ 1`; zero at and beyond the absorbing state.
    pub fn rate(&self, k: u64) -> f64 {
        assert!(k >= 1, "rates are indexed from 1");
        if let Some(s) = self.support_max() {
            if k >= s {
                return 0.0;
            }
        }
        match &self.kind {
            RateKind::Linear { lambda } => lambda * k as f64,
            RateKind::Saturating {
                eta,
                omega1,
                omega2,
                n,
            } => {
                let lam = eta / (*n as f64).powf(omega1 + omega2);
                lam * pow_int(k as f64, *omega1) * pow_int((n - k) as f64, *omega2)
            }
            RateKind::Truncated { base, .. } => base.rate(k),
            RateKind::Custom { values } => values[k as usize - 1],
            RateKind::Generated { rate, .. } => (rate.0)(k),
        }
    }

    /// `[λ_1, ..., λ_n]`.
    pub fn rates(&self, n: u64) -> Vec<f64> {
        (1..=n).map(|k| self.rate(k)).collect()
    }

    /// Checks positivity below the support bound and, for generated rates,
    /// the declared growth bound, for every `k ≤ n`.
    pub fn validate_up_to(&self, n: u64) -> Result<()> {
        let top = self.support_max().map_or(n, |s| n.min(s - 1));
        for k in 1..=top {
            let v = self.rate(k);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(MODULE, format!("lambda_{k} = {v} must be positive and finite")));
            }
            if let RateKind::Generated { growth_bound, .. } = &self.kind {
                if v > growth_bound * k as f64 * (1.0 + 1e-12) {
                    return Err(Error::domain(
                        MODULE,
                        format!("lambda_{k} = {v} violates the declared growth bound {growth_bound}·k"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Pairwise distinctness of `λ_1..λ_{n_max}` at relative tolerance
    /// [`DISTINCT_REL_TOL`].
    pub fn check_distinct(&self, n_max: u64) -> DistinctReport {
        let collisions = find_collisions(&self.rates(n_max), 1);
        DistinctReport {
            distinct: collisions.is_empty(),
            collisions,
        }
    }

    /// Slope for linear rates.
    pub fn linear_slope(&self) -> Option<f64> {
        match &self.kind {
            RateKind::Linear { lambda } => Some(*lambda),
            _ => None,
        }
    }

    /// `(lam, ω₁, ω₂, N)` for the saturating family.
    pub fn saturating_shape(&self) -> Option<(f64, f64, f64, u64)> {
        match &self.kind {
            RateKind::Saturating {
                eta,
                omega1,
                omega2,
                n,
            } => Some((eta / (*n as f64).powf(omega1 + omega2), *omega1, *omega2, *n)),
            _ => None,
        }
    }

    /// Flat key/value form used by the CLI config files.
    pub fn to_config(&self) -> Result<BTreeMap<String, String>> {
        let mut m = BTreeMap::new();
        match &self.kind {
            RateKind::Linear { lambda } => {
                m.insert("family".into(), "linear".into());
                m.insert("lambda".into(), fmt_f64(*lambda));
            }
            RateKind::Saturating {
                eta,
                omega1,
                omega2,
                n,
            } => {
                m.insert("family".into(), "saturating".into());
                m.insert("eta".into(), fmt_f64(*eta));
                m.insert("omega1".into(), fmt_f64(*omega1));
                m.insert("omega2".into(), fmt_f64(*omega2));
                m.insert("N".into(), n.to_string());
            }
            RateKind::Truncated { base, cutoff } => {
                for (k, v) in base.to_config()? {
                    m.insert(k, v);
                }
                m.insert("cutoff".into(), cutoff.to_string());
            }
            RateKind::Custom { values } => {
                m.insert("family".into(), "custom".into());
                let list: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
                m.insert("rates".into(), list.join(","));
            }
            RateKind::Generated { .. } => {
                return Err(Error::domain(MODULE, "generated rate sequences cannot be serialized"));
            }
        }
        Ok(m)
    }

    /// Inverse of [`RateSequence::to_config`]. Also accepts the shorthand
    /// families `s1` and `s2` with keys `lambda` and `N`.
    pub fn from_config(m: &BTreeMap<String, String>) -> Result<RateSequence> {
        let get = |k: &str| -> Result<&str> {
            m.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::domain(MODULE, format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            let s = get(k)?;
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(MODULE, format!("key `{k}`: `{s}` is not a number")))
        };
        let int = |k: &str| -> Result<u64> {
            let s = get(k)?;
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::domain(MODULE, format!("key `{k}`: `{s}` is not a nonnegative integer")))
        };
        let family = get("family")?.trim();
        let base = match family {
            "linear" => make_linear(num("lambda")?)?,
            "saturating" => make_saturating(num("eta")?, num("omega1")?, num("omega2")?, int("N")?)?,
            "s1" => make_s1(num("lambda")?, int("N")?)?,
            "s2" => make_s2(num("lambda")?, int("N")?)?,
            "custom" => {
                let values = get("rates")?
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::domain(MODULE, format!("bad rate `{s}` in list")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                make_custom(values)?
            }
            other => return Err(Error::domain(MODULE, format!("unknown rate family `{other}`"))),
        };
        if m.contains_key("cutoff") {
            return make_truncated(base, int("cutoff")?);
        }
        Ok(base)
    }
}

/// Index pairs `(i, j)`, `i < j`, of values equal within [`DISTINCT_REL_TOL`];
/// indices are offset by `first_index`.
pub fn find_collisions(values: &[f64], first_index: u64) -> Vec<(u64, u64)> {
    let mut idx: Vec<(f64, u64)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, first_index + i as u64))
        .collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut collisions = Vec::new();
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            let (a, b) = (idx[i].0, idx[j].0);
            if (b - a).abs() > DISTINCT_REL_TOL * a.abs().max(b.abs()) {
                break;
            }
            collisions.push((idx[i].1.min(idx[j].1), idx[i].1.max(idx[j].1)));
        }
    }
    collisions.sort_unstable();
    collisions
}

/// `x^p` that is exact for the common integer exponents.
fn pow_int(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Shortest decimal that round-trips.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        assert_eq!(make_linear(1.0).unwrap().rate(3), 3.0);
        assert_eq!(make_linear(0.5).unwrap().rate(1), 0.5);
        let r = make_linear(2.0).unwrap();
        let s: f64 = (1..=1_000_000u64).map(|k| 1.0 / r.rate(k)).sum();
        assert!(s > 6.9);
        assert!(make_linear(0.0).is_err());
    }

    #[test]
    fn saturating_examples() {
        let r = make_saturating(4.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(r.rate(1), 1.0);
        assert_eq!(r.rate(2), 0.0);
        assert_eq!(r.support_max(), Some(2));
        assert!(make_saturating(1.0, 1.0, 0.0, 10).is_err());
        let s1 = make_s1(0.3, 7).unwrap();
        assert!((s1.rate(2) - 0.3 * 5.0).abs() < 1e-15);
        let s2 = make_s2(0.3, 7).unwrap();
        assert!((s2.rate(2) - 0.3 * 10.0).abs() < 1e-14);
    }

    #[test]
    fn distinctness() {
        assert!(make_linear(1.0).unwrap().check_distinct(100).distinct);
        let rep = make_s2(1.0, 10).unwrap().check_distinct(9);
        assert!(!rep.distinct);
        assert!(rep.collisions.contains(&(2, 8)));
        let rep = make_custom(vec![1.0, 2.0, 2.0 + 1e-15]).unwrap().check_distinct(3);
        assert_eq!(rep.collisions, vec![(2, 3)]);
    }

    #[test]
    fn custom_support_and_absorption() {
        let r = make_custom(vec![1.0, 2.0]).unwrap();
        assert_eq!(r.support_max(), Some(3));
        assert_eq!(r.rate(3), 0.0);
        assert_eq!(r.rate(10), 0.0);
        assert!(make_custom(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn truncation() {
        let r = make_truncated(make_linear(1.0).unwrap(), 5).unwrap();
        assert_eq!(r.rates(6), vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.0]);
        assert!(make_truncated(make_s1(1.0, 4).unwrap(), 9).is_err());
    }

    #[test]
    fn generated_growth_bound() {
        let r = make_generated(|k| (k as f64).sqrt(), 1.0).unwrap();
        assert!(r.validate_up_to(1000).is_ok());
        let bad = make_generated(|k| (k * k) as f64, 2.0).unwrap();
        assert!(bad.validate_up_to(10).is_err());
        assert!(bad.to_config().is_err());
    }

    #[test]
    fn config_round_trip() {
        for r in [
            make_linear(0.7).unwrap(),
            make_saturating(3.0, 0.5, 2.0, 12).unwrap(),
            make_custom(vec![0.1, 2.5, 3.0]).unwrap(),
            make_truncated(make_linear(1.5).unwrap(), 6).unwrap(),
        ] {
            let back = RateSequence::from_config(&r.to_config().unwrap()).unwrap();
            assert_eq!(back.support_max(), r.support_max());
            for k in 1..15 {
                assert_eq!(back.rate(k), r.rate(k));
            }
        }
    }
}
