mod args;
mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use error::{CliError, EXIT_CONFIG};
use output::{Format, SCHEMA};

fn report(err: &CliError, as_json: bool) -> ExitCode {
    if as_json {
        let j = serde_json::to_string(&err.to_json(SCHEMA)).unwrap_or_default();
        eprintln!("{j}");
    } else {
        eprintln!("fracyule: {err}");
    }
    ExitCode::from(err.exit_code() as u8)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => config::parse_file(p)?,
        None => BTreeMap::new(),
    };
    let mut flags = cli.command.explicit();
    if let Some(f) = &cli.format {
        flags.insert("format".into(), f.clone());
    }
    if let Some(o) = &cli.output {
        flags.insert("output".into(), o.display().to_string());
    }
    let env_seed = std::env::var(config::SEED_ENV).ok();
    let cfg = config::Resolved::merge(file, flags, &cli.command.allowed_keys(), env_seed)?;
    let format = Format::parse(cfg.str("format"))?;

    let (out, failure) = match cfg.get::<usize>("threads")? {
        Some(0) => return Err(CliError::Config("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| commands::run(&cli.command, &cfg))?,
        None => commands::run(&cli.command, &cfg)?,
    };

    // output path and thread count do not change the results
    let mut echo = cfg.values.clone();
    echo.remove("output");
    echo.remove("threads");
    let bytes = output::render(&out, format, cli.command.name(), &echo)?;
    output::emit(&bytes, cfg.str("output").map(std::path::Path::new))?;
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--error-json") {
                let err = CliError::Config(e.kind().to_string());
                return report(&err, true);
            }
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, cli.error_json),
    }
}
