use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde_json::json;

use fracyule::fnbp::{self, PmfMethod, PmfOptions, ProcessSpec};
use fracyule::pmf::Pmf;
use fracyule::rates::RateSequence;
use fracyule::sim::{self, SimConfig};
use fracyule::validate::{caputo_residual, laplace_quadrature_check};
use fracyule::yule_net::{self, FiniteRoute, ModelParams, RhoBase, TailState, DEFAULT_N_MAX};

use crate::args::Command;
use crate::config::Resolved;
use crate::error::CliError;
use crate::output::Output;

/// Figure 1 panels: `(ρ, N)`.
pub const FIGURE1: [(f64, u64); 6] = [(1.0, 200), (0.1, 200), (0.01, 200), (0.005, 200), (0.001, 200), (0.0001, 200)];
/// Figure 2 panels: `N`, with `ρ = 1/(N + 1)`.
pub const FIGURE2: [u64; 3] = [100, 1000, 200];
/// Figure 3 panels: `α` values and the plotted state.
pub const FIGURE3: [(&str, &[f64], TailState); 3] = [
    ("a", &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], TailState::Top),
    ("b", &[0.8, 0.9, 1.0, 1.1, 1.2], TailState::Top),
    ("c", &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], TailState::BelowTop),
];

fn parse_enum<T: DeserializeOwned>(key: &str, s: &str) -> Result<T, CliError> {
    serde_json::from_value(json!(s.replace('-', "_")))
        .map_err(|_| CliError::Config(format!("option `{key}`: unknown value `{s}`")))
}

fn rates(cfg: &Resolved, nu: f64, beta: f64) -> Result<RateSequence, CliError> {
    let family = cfg.str("family").unwrap_or("linear");
    let mut m = BTreeMap::new();
    m.insert("family".to_string(), family.to_string());
    for key in ["eta", "omega1", "omega2", "N", "rates", "cutoff"] {
        if let Some(v) = cfg.str(key) {
            m.insert(key.to_string(), v.to_string());
        }
    }
    match (cfg.get::<f64>("lambda")?, cfg.get::<f64>("rho")?) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either --lambda or --rho, not both".into())),
        (Some(l), None) => {
            m.insert("lambda".into(), l.to_string());
        }
        (None, Some(r)) => {
            m.insert("lambda".into(), (r * beta.powf(nu)).to_string());
        }
        (None, None) => {
            if matches!(family, "linear" | "s1" | "s2") {
                m.insert("lambda".into(), "1".into());
            }
        }
    }
    Ok(RateSequence::from_config(&m)?)
}

fn process(cfg: &Resolved, allow_start: bool) -> Result<(ProcessSpec, f64), CliError> {
    let nu = cfg.get_or("nu", 1.0)?;
    let beta = cfg.get_or("beta", 1.0)?;
    let start = cfg.get_or("start", 1u64)?;
    if start != 1 && !allow_start {
        return Err(CliError::Config("--start applies to the in-link process only (use --process)".into()));
    }
    let spec = ProcessSpec::with_start(nu, rates(cfg, nu, beta)?, start)?;
    Ok((spec, beta))
}

fn model(cfg: &Resolved) -> Result<ModelParams, CliError> {
    let (spec, beta) = process(cfg, false)?;
    Ok(ModelParams::new(beta, spec)?)
}

fn pmf_output(pmf: &Pmf) -> Result<Output, CliError> {
    let mut out = Output::new(vec!["n", "prob"], pmf)?;
    for (n, p) in pmf.iter() {
        out.row(vec![n.into(), p.into()]);
    }
    Ok(out)
}

pub fn run(command: &Command, cfg: &Resolved) -> Result<(Output, Option<CliError>), CliError> {
    let out = match command {
        Command::Pmf(_) => pmf(cfg)?,
        Command::LimitPmf(_) => limit_pmf(cfg)?,
        Command::Mean(_) => mean(cfg)?,
        Command::Simulate(_) => simulate(cfg)?,
        Command::Compare(_) => return compare(cfg),
        Command::Figure(_) => figure(cfg)?,
        Command::Validate(_) => validate(cfg)?,
    };
    Ok((out, None))
}

fn pmf(cfg: &Resolved) -> Result<Output, CliError> {
    let t: f64 = cfg.require("t")?;
    let route = cfg.str("route").unwrap_or("auto");
    let pmf = if cfg.flag("process")? {
        let (spec, _) = process(cfg, true)?;
        let n_max = cfg.get_or("n-max", spec.rates.support_max().unwrap_or(DEFAULT_N_MAX))?;
        let opts = PmfOptions {
            method: parse_enum::<PmfMethod>("route", route)?,
            ..Default::default()
        };
        fnbp::state_pmf_with(&spec, t, n_max, &opts)?
    } else {
        let mp = model(cfg)?;
        let n_max = cfg.get_or("n-max", mp.default_n_max())?;
        yule_net::finite_time_pmf_with(&mp, t, n_max, parse_enum::<FiniteRoute>("route", route)?)?
    };
    pmf_output(&pmf)
}

fn limit_pmf(cfg: &Resolved) -> Result<Output, CliError> {
    let mp = model(cfg)?;
    let n_max = cfg.get_or("n-max", mp.default_n_max())?;
    let pmf = match cfg.str("route").unwrap_or("auto") {
        "auto" => yule_net::limiting_pmf(&mp, n_max)?,
        "closed-form" | "closed_form" => {
            let (lam, w1, w2, cap) = mp
                .process
                .rates
                .saturating_shape()
                .ok_or_else(|| CliError::Config("closed-form route needs family s1 or s2".into()))?;
            let rho = lam / mp.beta_nu();
            let top = n_max.min(cap);
            let (f, tag): (fn(f64, u64, u64) -> fracyule::Result<f64>, _) = match (w1, w2) {
                (w1, w2) if w1 == 0.0 && w2 == 1.0 => (yule_net::limiting_pmf_saturating_s1, "closed_form_s1"),
                (w1, w2) if w1 == 1.0 && w2 == 1.0 => (yule_net::limiting_pmf_saturating_s2, "closed_form_s2"),
                _ => return Err(CliError::Config("closed-form route needs family s1 or s2".into())),
            };
            let probs = (1..=top).map(|n| f(rho, cap, n)).collect::<fracyule::Result<Vec<_>>>()?;
            let total: f64 = probs.iter().sum();
            let tail = if top == cap { 0.0 } else { 1.0 - total };
            Pmf::new(1, probs, tag).with_tail(tail)
        }
        other => return Err(CliError::Config(format!("option `route`: unknown value `{other}`"))),
    };
    pmf_output(&pmf)
}

fn mean(cfg: &Resolved) -> Result<Output, CliError> {
    let k_max = cfg.get_or("k-max", DEFAULT_N_MAX)?;
    let t: Option<f64> = cfg.get("t")?;
    let est = if cfg.flag("process")? {
        let (spec, _) = process(cfg, true)?;
        let t = t.ok_or_else(|| CliError::Config("--process needs --t".into()))?;
        fnbp::mean(&spec, t, k_max)?
    } else {
        let mp = model(cfg)?;
        match t {
            Some(t) => yule_net::finite_time_mean(&mp, t, k_max)?,
            None => yule_net::limiting_mean(&mp, k_max)?,
        }
    };
    let t_cell = t.unwrap_or(f64::INFINITY);
    let mut out = Output::new(
        vec!["t", "mean", "terms", "last_term", "method"],
        json!({ "t": t, "estimate": est }),
    )?;
    out.row(vec![
        t_cell.into(),
        est.value.into(),
        est.terms.into(),
        est.last_term.into(),
        est.method.into(),
    ]);
    Ok(out)
}

fn sim_config(cfg: &Resolved) -> Result<SimConfig, CliError> {
    let mp = model(cfg)?;
    let t = cfg.require("t")?;
    let replicas = cfg.get_or("replicas", 10_000u64)?;
    let seed = cfg.get_or("seed", 0u64)?;
    Ok(SimConfig::new(mp, t, replicas, seed)?)
}

fn simulate(cfg: &Resolved) -> Result<Output, CliError> {
    let sc = sim_config(cfg)?;
    if cfg.flag("snapshot")? {
        let replica = cfg.get_or("replica", 0u64)?;
        let snap = sim::simulate_network(&sc, replica)?;
        let mut out = Output::new(vec!["page", "creation_time", "inlinks"], &snap)?;
        for (i, (tau, k)) in snap.page_creation_times.iter().zip(&snap.page_inlink_counts).enumerate() {
            out.row(vec![(i as u64).into(), (*tau).into(), (*k).into()]);
        }
        return Ok(out);
    }
    let emp = sim::sample_uniform_page_size(&sc)?;
    let mut out = Output::new(vec!["n", "count", "prob"], &emp)?;
    for (i, &c) in emp.counts.iter().enumerate() {
        out.row(vec![(i as u64 + 1).into(), c.into(), emp.pmf.probs[i].into()]);
    }
    Ok(out)
}

fn compare(cfg: &Resolved) -> Result<(Output, Option<CliError>), CliError> {
    let sc = sim_config(cfg)?;
    let n_max = cfg.get_or("n-max", sc.model.default_n_max())?;
    let max_tv = cfg.get_or("max-tv", 0.02)?;
    let alpha = cfg.get_or("alpha", 0.001)?;
    let analytic = yule_net::finite_time_pmf(&sc.model, sc.t_obs, n_max)?;
    let emp = sim::sample_uniform_page_size(&sc)?;
    let report = sim::gof_compare(&emp, &analytic)?;
    let pass = report.passes(max_tv, alpha);
    let mut out = Output::new(
        vec!["sample_size", "tv_distance", "chi_square", "dof", "p_value", "max_tv", "alpha", "pass"],
        json!({ "report": &report, "max_tv": max_tv, "alpha": alpha, "pass": pass }),
    )?;
    out.row(vec![
        report.sample_size.into(),
        report.tv_distance.into(),
        report.chi_square.into(),
        report.dof.into(),
        report.p_value.into(),
        max_tv.into(),
        alpha.into(),
        (if pass { "true" } else { "false" }).into(),
    ]);
    let failure = (cfg.flag("assert")? && !pass).then(|| {
        CliError::Statistical(format!(
            "tv = {:.4} (limit {max_tv}), p = {:.3e} (limit {alpha})",
            report.tv_distance, report.p_value
        ))
    });
    Ok((out, failure))
}

/// `1..=100` followed by 40 points per decade up to `top`.
fn threshold_grid(top: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (1..=top.min(100)).collect();
    let mut i = 1;
    loop {
        let n = (100.0 * 10f64.powf(i as f64 / 40.0)).round() as u64;
        if n > top {
            break;
        }
        if g.last() != Some(&n) {
            g.push(n);
        }
        i += 1;
    }
    if *g.last().unwrap() != top {
        g.push(top);
    }
    g
}

fn panels(cfg: &Resolved, count: usize) -> Result<Vec<usize>, CliError> {
    match cfg.get::<usize>("panel")? {
        None => Ok((0..count).collect()),
        Some(p) if (1..=count).contains(&p) => Ok(vec![p - 1]),
        Some(p) => Err(CliError::Config(format!("panel {p} out of range 1..={count}"))),
    }
}

fn s2_series(rho: f64, cap: u64, label: String, rows: &mut Vec<(u64, f64, String)>) -> Result<(), CliError> {
    for n in 1..=cap {
        rows.push((n, yule_net::limiting_pmf_saturating_s2(rho, cap, n)?, label.clone()));
    }
    Ok(())
}

fn figure(cfg: &Resolved) -> Result<Output, CliError> {
    let which = cfg.require::<u32>("figure")?;
    let mut rows: Vec<(u64, f64, String)> = Vec::new();
    match which {
        1 => {
            for i in panels(cfg, FIGURE1.len())? {
                let (rho, cap) = FIGURE1[i];
                s2_series(rho, cap, format!("rho={rho} N={cap}"), &mut rows)?;
            }
        }
        2 => {
            for i in panels(cfg, FIGURE2.len())? {
                let cap = FIGURE2[i];
                s2_series(1.0 / (cap + 1) as f64, cap, format!("rho=1/{} N={cap}", cap + 1), &mut rows)?;
            }
        }
        3 => {
            let top = cfg.get_or("n-cap-max", 10_000u64)?;
            if top < 2 {
                return Err(CliError::Config("n-cap-max must be at least 2".into()));
            }
            let base = parse_enum::<RhoBase>("rho-base", cfg.str("rho-base").unwrap_or("n-plus-one"))?;
            let grid = threshold_grid(top);
            for i in panels(cfg, FIGURE3.len())? {
                let (tag, alphas, state) = FIGURE3[i];
                for &a in alphas {
                    let curve = yule_net::saturation_tail_curve(a, &grid, state, base)?;
                    for p in curve {
                        rows.push((p.n_cap, p.prob, format!("{tag}: alpha={a}")));
                    }
                }
            }
        }
        other => return Err(CliError::Config(format!("unknown figure {other} (1, 2 or 3)"))),
    }
    let json_rows: Vec<_> = rows.iter().map(|(x, y, s)| json!({ "x": x, "y": y, "series": s })).collect();
    let mut out = Output::new(vec!["x", "y", "series"], json!({ "figure": which, "points": json_rows }))?;
    for (x, y, s) in rows {
        out.row(vec![x.into(), y.into(), s.into()]);
    }
    Ok(out)
}

fn validate(cfg: &Resolved) -> Result<Output, CliError> {
    let (spec, _) = process(cfg, true)?;
    let n = cfg.get_or("n", spec.start_count)?;
    match cfg.str("check").unwrap_or("caputo") {
        "caputo" => {
            let step = cfg.get_or("step", 1e-3)?;
            let grid = cfg.list::<f64>("t-grid")?.unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
            let tol = cfg.get_or("tolerance", 1e-3)?;
            let rep = caputo_residual(&spec, n, &grid, step, tol)?;
            let mut out = Output::new(vec!["t", "residual"], &rep)?;
            for (t, r) in rep.grid.iter().zip(&rep.residuals) {
                out.row(vec![(*t).into(), (*r).into()]);
            }
            Ok(out)
        }
        "laplace" => {
            let z = cfg.get_or("z", 1.0)?;
            let t_cut = cfg.get_or("t-cut", 60.0 / z)?;
            let c = laplace_quadrature_check(&spec, z, n, t_cut)?;
            let mut out = Output::new(vec!["z", "n", "quadrature", "analytic", "tail_bound", "rel_error"], c)?;
            out.row(vec![
                c.z.into(),
                c.n.into(),
                c.quadrature.into(),
                c.analytic.into(),
                c.tail_bound.into(),
                c.rel_error.into(),
            ]);
            Ok(out)
        }
        other => Err(CliError::Config(format!("option `check`: unknown value `{other}` (caputo or laplace)"))),
    }
}
