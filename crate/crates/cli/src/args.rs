use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Evaluate, simulate and validate the fractional nonlinear Yule model.
#[derive(Debug, Parser)]
#[command(name = "fracyule", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` file supplying defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the table here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Output format: csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// On failure, print a JSON error object to standard error.
    #[arg(long, global = true)]
    pub error_json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite-time in-link distribution of a uniformly chosen page.
    Pmf(PmfArgs),
    /// Limiting (t → ∞) in-link distribution.
    LimitPmf(LimitArgs),
    /// Mean in-link count (finite time or limit).
    Mean(MeanArgs),
    /// Monte Carlo sizes of uniformly chosen pages, or one network snapshot.
    Simulate(SimulateArgs),
    /// Monte Carlo sample against the analytic law (TV and chi-square).
    Compare(CompareArgs),
    /// Plot-ready data for the saturation figures.
    Figure(FigureArgs),
    /// Numerical checks of the forward equations and Laplace transforms.
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pmf(_) => "pmf",
            Command::LimitPmf(_) => "limit-pmf",
            Command::Mean(_) => "mean",
            Command::Simulate(_) => "simulate",
            Command::Compare(_) => "compare",
            Command::Figure(_) => "figure",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Fractional order ν in (0, 1].
    #[arg(long)]
    pub nu: Option<String>,
    /// Page creation rate β.
    #[arg(long)]
    pub beta: Option<String>,
    /// Rate family: linear, saturating, s1, s2 or custom.
    #[arg(long)]
    pub family: Option<String>,
    /// Rate scale λ.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Reduced scale ρ = λ/β^ν (alternative to --lambda).
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub omega1: Option<String>,
    #[arg(long)]
    pub omega2: Option<String>,
    /// Saturation threshold.
    #[arg(long = "N")]
    pub cap: Option<String>,
    /// Comma-separated rates λ_1, λ_2, ... for the custom family.
    #[arg(long)]
    pub rates: Option<String>,
    /// Make this state absorbing.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Initial in-link count of the process (state commands only).
    #[arg(long)]
    pub start: Option<String>,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub n_max: Option<String>,
    /// auto, partial_fraction, nu_one_closed, linear_split, incomplete_beta,
    /// quadrature or contour (with --process: auto, partial_fraction, contour).
    #[arg(long)]
    pub route: Option<String>,
    /// State probabilities of the in-link process itself.
    #[arg(long)]
    pub process: bool,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n_max: Option<String>,
    /// auto or closed-form (s1/s2 alternating sums).
    #[arg(long)]
    pub route: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Observation time; omit for the limit.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub k_max: Option<String>,
    /// Mean of the in-link process itself.
    #[arg(long)]
    pub process: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub replicas: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads (advisory; results do not depend on it).
    #[arg(long)]
    pub threads: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Emit the full network of one replica instead of page sizes.
    #[arg(long)]
    pub snapshot: bool,
    /// Replica index used with --snapshot.
    #[arg(long)]
    pub replica: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Largest size of the analytic law.
    #[arg(long)]
    pub n_max: Option<String>,
    /// Exit with status 4 unless tv < max-tv and p > alpha.
    #[arg(long)]
    pub assert: bool,
    #[arg(long)]
    pub max_tv: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure number: 1, 2 or 3.
    pub which: String,
    /// Single panel (1-based); all panels when omitted.
    #[arg(long)]
    pub panel: Option<String>,
    /// Largest threshold N on the x axis of figure 3.
    #[arg(long)]
    pub n_cap_max: Option<String>,
    /// Base of ρ in figure 3: n-plus-one or n-minus-one.
    #[arg(long)]
    pub rho_base: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// caputo or laplace.
    #[arg(long)]
    pub check: Option<String>,
    /// State index.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub step: Option<String>,
    /// Comma-separated evaluation times (multiples of --step).
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
    /// Laplace variable.
    #[arg(long)]
    pub z: Option<String>,
    /// Upper quadrature limit.
    #[arg(long)]
    pub t_cut: Option<String>,
}

fn put(m: &mut BTreeMap<String, String>, key: &str, v: &Option<String>) {
    if let Some(v) = v {
        m.insert(key.to_string(), v.clone());
    }
}

fn put_flag(m: &mut BTreeMap<String, String>, key: &str, v: bool) {
    if v {
        m.insert(key.to_string(), "true".into());
    }
}

impl ModelArgs {
    fn collect(&self, m: &mut BTreeMap<String, String>) {
        put(m, "nu", &self.nu);
        put(m, "beta", &self.beta);
        put(m, "family", &self.family);
        put(m, "lambda", &self.lambda);
        put(m, "rho", &self.rho);
        put(m, "eta", &self.eta);
        put(m, "omega1", &self.omega1);
        put(m, "omega2", &self.omega2);
        put(m, "N", &self.cap);
        put(m, "rates", &self.rates);
        put(m, "cutoff", &self.cutoff);
        put(m, "start", &self.start);
    }
}

impl SimArgs {
    fn collect(&self, m: &mut BTreeMap<String, String>) {
        put(m, "t", &self.t);
        put(m, "replicas", &self.replicas);
        put(m, "seed", &self.seed);
        put(m, "threads", &self.threads);
    }
}

pub const MODEL_KEYS: &[&str] = &[
    "nu", "beta", "family", "lambda", "rho", "eta", "omega1", "omega2", "N", "rates", "cutoff", "start",
];
pub const GLOBAL_KEYS: &[&str] = &["output", "format", "error-json"];

impl Command {
    /// Options given explicitly on the command line.
    pub fn explicit(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        match self {
            Command::Pmf(a) => {
                a.model.collect(&mut m);
                put(&mut m, "t", &a.t);
                put(&mut m, "n-max", &a.n_max);
                put(&mut m, "route", &a.route);
                put_flag(&mut m, "process", a.process);
            }
            Command::LimitPmf(a) => {
                a.model.collect(&mut m);
                put(&mut m, "n-max", &a.n_max);
                put(&mut m, "route", &a.route);
            }
            Command::Mean(a) => {
                a.model.collect(&mut m);
                put(&mut m, "t", &a.t);
                put(&mut m, "k-max", &a.k_max);
                put_flag(&mut m, "process", a.process);
            }
            Command::Simulate(a) => {
                a.model.collect(&mut m);
                a.sim.collect(&mut m);
                put_flag(&mut m, "snapshot", a.snapshot);
                put(&mut m, "replica", &a.replica);
            }
            Command::Compare(a) => {
                a.model.collect(&mut m);
                a.sim.collect(&mut m);
                put(&mut m, "n-max", &a.n_max);
                put_flag(&mut m, "assert", a.assert);
                put(&mut m, "max-tv", &a.max_tv);
                put(&mut m, "alpha", &a.alpha);
            }
            Command::Figure(a) => {
                m.insert("figure".into(), a.which.clone());
                put(&mut m, "panel", &a.panel);
                put(&mut m, "n-cap-max", &a.n_cap_max);
                put(&mut m, "rho-base", &a.rho_base);
            }
            Command::Validate(a) => {
                a.model.collect(&mut m);
                put(&mut m, "check", &a.check);
                put(&mut m, "n", &a.n);
                put(&mut m, "step", &a.step);
                put(&mut m, "t-grid", &a.t_grid);
                put(&mut m, "tolerance", &a.tolerance);
                put(&mut m, "z", &a.z);
                put(&mut m, "t-cut", &a.t_cut);
            }
        }
        m
    }

    /// Keys a config file may set for this command.
    pub fn allowed_keys(&self) -> Vec<&'static str> {
        let mut k: Vec<&'static str> = GLOBAL_KEYS.to_vec();
        let model = |k: &mut Vec<&'static str>| k.extend_from_slice(MODEL_KEYS);
        let sim = ["t", "replicas", "seed", "threads"];
        match self {
            Command::Pmf(_) => {
                model(&mut k);
                k.extend(["t", "n-max", "route", "process"]);
            }
            Command::LimitPmf(_) => {
                model(&mut k);
                k.extend(["n-max", "route"]);
            }
            Command::Mean(_) => {
                model(&mut k);
                k.extend(["t", "k-max", "process"]);
            }
            Command::Simulate(_) => {
                model(&mut k);
                k.extend(sim);
                k.extend(["snapshot", "replica"]);
            }
            Command::Compare(_) => {
                model(&mut k);
                k.extend(sim);
                k.extend(["n-max", "assert", "max-tv", "alpha"]);
            }
            Command::Figure(_) => k.extend(["panel", "n-cap-max", "rho-base"]),
            Command::Validate(_) => {
                model(&mut k);
                k.extend(["check", "n", "step", "t-grid", "tolerance", "z", "t-cut"]);
            }
        }
        k
    }
}
