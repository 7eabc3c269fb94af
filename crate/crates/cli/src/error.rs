use serde::Serialize;
use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_STATISTICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Library(#[from] fracyule::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("statistical test failed: {0}")]
    Statistical(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorJson<'a> {
    pub schema: &'a str,
    pub exit_code: i32,
    pub kind: &'a str,
    pub module: &'a str,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Library(fracyule::Error::Domain { .. }) => EXIT_CONFIG,
            CliError::Library(_) | CliError::Io(_) => EXIT_NUMERIC,
            CliError::Statistical(_) => EXIT_STATISTICAL,
        }
    }

    pub fn to_json(&self, schema: &'static str) -> ErrorJson<'static> {
        let (kind, module) = match self {
            CliError::Config(_) => ("config", "cli"),
            CliError::Library(e) => (
                match e {
                    fracyule::Error::Domain { .. } => "domain",
                    fracyule::Error::Precision { .. } => "precision",
                    fracyule::Error::Quadrature { .. } => "quadrature",
                    fracyule::Error::Routing { .. } => "routing",
                    fracyule::Error::EvaluationFailure { .. } => "evaluation",
                    fracyule::Error::ExplosionGuard { .. } => "explosion_guard",
                    fracyule::Error::InsufficientSample { .. } => "insufficient_sample",
                },
                e.module(),
            ),
            CliError::Io(_) => ("io", "cli"),
            CliError::Statistical(_) => ("statistical", "cli"),
        };
        ErrorJson {
            schema,
            exit_code: self.exit_code(),
            kind,
            module,
            message: self.to_string(),
        }
    }
}
