//! Exact Monte Carlo simulation of the generalized Yule model and
//! goodness-of-fit comparison against the analytic laws.
//!
//! Streams: every replica owns a ChaCha8 key derived from `(seed, replica)`;
//! stream 0 drives the network-level draws (page count, page selection) and
//! stream `i + 1` drives page `i` (its creation time, then its in-link path).
//! Page 0 is the root, created at time zero. A page's in-link count therefore
//! does not depend on which other pages were simulated.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::fnbp::ProcessSpec;
use crate::pmf::Pmf;
use crate::rates::RateSequence;
use crate::yule_net::ModelParams;

const MODULE: &str = "sim";

/// Default cap on birth events along one in-link path.
pub const DEFAULT_EVENT_GUARD: u64 = 100_000_000;

/// Default cap on the number of pages in one simulated network.
pub const DEFAULT_PAGE_GUARD: u64 = 50_000_000;

/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelParams,
    pub t_obs: f64,
    pub replicas: u64,
    pub seed: u64,
    pub max_pages_per_replica: u64,
    pub max_events_per_page: u64,
}

impl SimConfig {
    pub fn new(model: ModelParams, t_obs: f64, replicas: u64, seed: u64) -> Result<Self> {
        let c = SimConfig {
            model,
            t_obs,
            replicas,
            seed,
            max_pages_per_replica: DEFAULT_PAGE_GUARD,
            max_events_per_page: DEFAULT_EVENT_GUARD,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.t_obs > 0.0 && self.t_obs.is_finite()) {
            return Err(Error::domain(MODULE, format!("t_obs must be positive and finite, got {}", self.t_obs)));
        }
        if self.replicas < 1 {
            return Err(Error::domain(MODULE, "replicas must be at least 1"));
        }
        if self.max_pages_per_replica < 1 || self.max_events_per_page < 1 {
            return Err(Error::domain(MODULE, "guards must be at least 1"));
        }
        Ok(())
    }
}

/// Pages present at the observation time, sorted by creation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub t_obs: f64,
    pub page_creation_times: Vec<f64>,
    pub page_inlink_counts: Vec<u64>,
}

impl NetworkSnapshot {
    pub fn pages(&self) -> usize {
        self.page_creation_times.len()
    }
}

/// Empirical law of a sampled size together with its sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPmf {
    pub sample_size: u64,
    /// `counts[i]` is the number of draws equal to `pmf.support_min + i`.
    pub counts: Vec<u64>,
    pub pmf: Pmf,
}

impl EmpiricalPmf {
    /// Builds the empirical law of draws `≥ 1`.
    pub fn from_draws(draws: &[u64]) -> Self {
        let top = draws.iter().copied().max().unwrap_or(1).max(1);
        let mut counts = vec![0u64; top as usize];
        for &d in draws {
            counts[(d - 1) as usize] += 1;
        }
        let n = draws.len() as f64;
        let probs = counts.iter().map(|&c| c as f64 / n).collect();
        EmpiricalPmf {
            sample_size: draws.len() as u64,
            counts,
            pmf: Pmf::new(1, probs, "empirical").with_tail(0.0),
        }
    }

    pub fn count(&self, n: u64) -> u64 {
        if n < self.pmf.support_min {
            return 0;
        }
        self.counts.get((n - self.pmf.support_min) as usize).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub sample_size: u64,
    pub tv_distance: f64,
    pub chi_square: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Inclusive size ranges of the chi-square bins; the last one is open.
    pub bins: Vec<(u64, Option<u64>)>,
    pub empirical: Pmf,
    pub analytic: Pmf,
}

impl GofReport {
    pub fn passes(&self, max_tv: f64, alpha: f64) -> bool {
        self.tv_distance < max_tv && self.p_value > alpha
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// RNG for `(seed, replica, stream)`.
pub fn stream_rng(seed: u64, replica: u64, stream: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(replica.wrapping_add(0x5851_F42D_4C95_7F2D)));
    let mut bytes = [0u8; 32];
    let mut s = key;
    for chunk in bytes.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(stream);
    rng
}

/// One-sided stable `S` with `E e^{−sS} = e^{−s^ν}` (Kanter's representation).
pub fn sample_stable_positive<R: Rng + ?Sized>(nu: f64, rng: &mut R) -> f64 {
    debug_assert!(nu > 0.0 && nu < 1.0);
    loop {
        // U uniform on (0, π), W standard exponential
        let u = std::f64::consts::PI * rng.random::<f64>();
        let w: f64 = Exp1.sample(rng);
        if u <= 0.0 || w <= 0.0 {
            continue;
        }
        let ln_s = (nu * u).sin().ln() - u.sin().ln() / nu
            + (1.0 - nu) / nu * (((1.0 - nu) * u).sin().ln() - w.ln());
        let s = ln_s.exp();
        if s > 0.0 && s.is_finite() {
            return s;
        }
    }
}

/// `L(t) = (t / S)^ν`, the inverse stable subordinator at `t`.
pub fn sample_inverse_subordinator<R: Rng + ?Sized>(nu: f64, t: f64, rng: &mut R) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if nu == 1.0 {
        return t;
    }
    let s = sample_stable_positive(nu, rng);
    (nu * (t.ln() - s.ln())).exp()
}

/// Classical birth process started at `start`, run for `duration`.
pub fn simulate_birth_path<R: Rng + ?Sized>(
    rates: &RateSequence,
    duration: f64,
    start: u64,
    rng: &mut R,
    guard: u64,
) -> Result<u64> {
    let mut n = start;
    let mut clock = 0.0;
    let mut events = 0u64;
    loop {
        let lam = rates.rate(n);
        if lam <= 0.0 {
            return Ok(n);
        }
        let hold: f64 = Exp1.sample(rng);
        clock += hold / lam;
        if clock > duration {
            return Ok(n);
        }
        n += 1;
        events += 1;
        if events >= guard {
            return Err(Error::ExplosionGuard { count: events, guard });
        }
    }
}

/// `𝔑^ν(duration)` through the time change `𝔑¹(L(duration))`.
pub fn simulate_fractional_count<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    duration: f64,
    rng: &mut R,
    guard: u64,
) -> Result<u64> {
    let op = sample_inverse_subordinator(spec.nu, duration, rng);
    simulate_birth_path(&spec.rates, op, spec.start_count, rng, guard)
}

/// Creation time with CDF `(e^{βτ} − 1)/(e^{βt} − 1)` on `[0, t]`.
fn creation_time<R: Rng + ?Sized>(beta: f64, t: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    ((u * (beta * t).exp_m1()).ln_1p() / beta).min(t)
}

/// Page `page` of replica `replica`: creation time and in-link count.
fn simulate_page(cfg: &SimConfig, replica: u64, page: u64) -> Result<(f64, u64)> {
    let mut rng = stream_rng(cfg.seed, replica, page + 1);
    let tau = if page == 0 {
        0.0
    } else {
        creation_time(cfg.model.beta, cfg.t_obs, &mut rng)
    };
    let count = simulate_fractional_count(&cfg.model.process, cfg.t_obs - tau, &mut rng, cfg.max_events_per_page)?;
    Ok((tau, count))
}

fn geometric_failures<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<u64> {
    let p = (-cfg.model.beta * cfg.t_obs).exp();
    if p <= 0.0 {
        return Err(Error::domain(MODULE, "β·t_obs too large: page count overflows"));
    }
    let g = Geometric::new(p).map_err(|e| Error::domain(MODULE, e.to_string()))?;
    Ok(g.sample(rng))
}

fn check_pages(cfg: &SimConfig, pages: u64) -> Result<()> {
    if pages > cfg.max_pages_per_replica {
        return Err(Error::ExplosionGuard {
            count: pages,
            guard: cfg.max_pages_per_replica,
        });
    }
    Ok(())
}

/// Full network of replica `replica`: a geometric(`e^{−βt}`) number of pages,
/// the root at time zero and the rest at iid creation times.
pub fn simulate_network(cfg: &SimConfig, replica: u64) -> Result<NetworkSnapshot> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, replica, 0);
    let pages = 1 + geometric_failures(cfg, &mut rng)?;
    check_pages(cfg, pages)?;
    let mut rows = (0..pages)
        .map(|i| simulate_page(cfg, replica, i))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(NetworkSnapshot {
        t_obs: cfg.t_obs,
        page_creation_times: rows.iter().map(|r| r.0).collect(),
        page_inlink_counts: rows.iter().map(|r| r.1).collect(),
    })
}

/// Page drawn uniformly among the non-root pages of replica `replica`,
/// conditionally on there being one. Returns `(page index, creation time,
/// in-link count)`; the values coincide with that page in the full network.
pub fn sample_uniform_page(cfg: &SimConfig, replica: u64) -> Result<(u64, f64, u64)> {
    let mut rng = stream_rng(cfg.seed, replica, 0);
    // given at least one non-root page, their number is 1 + geometric failures
    let non_root = 1 + geometric_failures(cfg, &mut rng)?;
    check_pages(cfg, non_root + 1)?;
    let page = 1 + rng.random_range(0..non_root);
    let (tau, count) = simulate_page(cfg, replica, page)?;
    Ok((page, tau, count))
}

/// In-link counts of one uniformly chosen page over `cfg.replicas` replicas.
pub fn sample_uniform_page_size(cfg: &SimConfig) -> Result<EmpiricalPmf> {
    cfg.validate()?;
    let draws: Vec<Result<u64>> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| sample_uniform_page(cfg, r).map(|x| x.2))
        .collect();
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalPmf::from_draws(&draws))
}

/// Draws of `𝔑^ν(duration)`, one per replica.
pub fn sample_fractional_counts(spec: &ProcessSpec, duration: f64, replicas: u64, seed: u64) -> Result<EmpiricalPmf> {
    let draws: Vec<Result<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| simulate_fractional_count(spec, duration, &mut stream_rng(seed, r, 0), DEFAULT_EVENT_GUARD))
        .collect();
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalPmf::from_draws(&draws))
}

/// TV distance and chi-square test of `empirical` against `analytic`.
///
/// Mass above the last listed analytic size is compared as a single cell,
/// both for the TV distance and for the chi-square bins.
/// Cells run over the analytic sizes plus one cell for everything above its
/// last listed size. Consecutive cells are merged left to right until each
/// bin expects at least [`MIN_EXPECTED`] draws; a short remainder joins the
/// last bin.
pub fn gof_compare(empirical: &EmpiricalPmf, analytic: &Pmf) -> Result<GofReport> {
    let n = empirical.sample_size as f64;
    if empirical.sample_size == 0 {
        return Err(Error::InsufficientSample {
            message: "empty sample".into(),
        });
    }
    let lo = analytic.support_min;
    let hi = analytic.n_max();
    let below: u64 = (empirical.pmf.support_min..lo).map(|k| empirical.count(k)).sum();
    let listed: f64 = analytic.probs.iter().sum();
    let beyond_mass = (1.0 - listed).max(0.0);
    let beyond_count = empirical.sample_size
        - below
        - (lo..=hi).map(|k| empirical.count(k)).sum::<u64>();

    // (first size, observed, expected)
    let mut cells: Vec<(u64, f64, f64)> = (lo..=hi).map(|k| (k, empirical.count(k) as f64, n * analytic.prob(k))).collect();
    cells.push((hi + 1, beyond_count as f64, n * beyond_mass));
    // sizes below the analytic support have zero expected count
    cells[0].1 += below as f64;

    let mut bins: Vec<(u64, f64, f64)> = Vec::new();
    let mut open: Option<(u64, f64, f64)> = None;
    for (k, o, e) in cells {
        let cur = open.get_or_insert((k, 0.0, 0.0));
        cur.1 += o;
        cur.2 += e;
        if cur.2 >= MIN_EXPECTED {
            bins.push(open.take().unwrap());
        }
    }
    if let Some((_, o, e)) = open {
        match bins.last_mut() {
            Some(last) => {
                last.1 += o;
                last.2 += e;
            }
            None => {
                return Err(Error::InsufficientSample {
                    message: format!("{} draws give no bin with expected count ≥ {MIN_EXPECTED}", empirical.sample_size),
                })
            }
        }
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientSample {
            message: "fewer than two chi-square bins; increase the sample size".into(),
        });
    }
    // sizes above the analytic range form one cell
    let tv = 0.5
        * ((below as f64 / n)
            + (lo..=hi).map(|k| (empirical.count(k) as f64 / n - analytic.prob(k)).abs()).sum::<f64>()
            + (beyond_count as f64 / n - beyond_mass).abs());
    let chi_square: f64 = bins.iter().map(|&(_, o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() as u64 - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::eval(MODULE, e.to_string()))?;
    let p_value = dist.sf(chi_square);
    let ranges = bins
        .iter()
        .enumerate()
        .map(|(i, b)| (b.0, bins.get(i + 1).map(|next| next.0 - 1)))
        .collect();
    Ok(GofReport {
        sample_size: empirical.sample_size,
        tv_distance: tv.min(1.0),
        chi_square,
        dof,
        p_value,
        bins: ranges,
        empirical: empirical.pmf.clone(),
        analytic: analytic.clone(),
    })
}
