//! Flat `key = value` configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    = blank | comment | entry
//! comment = ("#" | ";") any*
//! entry   = key ws* "=" ws* value
//! key     = long option name without the leading dashes ("n-max", "N", ...);
//!           underscores are read as dashes
//! value   = any* (trimmed; may be empty only for unset)
//! ```
//!
//! Flags given on the command line take precedence over the file. The
//! environment variable `FRACYULE_SEED`, when set, overrides the seed from
//! either source.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const SEED_ENV: &str = "FRACYULE_SEED";

pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut m = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", i + 1)));
        }
        if m.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(m)
}

/// Resolved options for one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub values: BTreeMap<String, String>,
}

impl Resolved {
    pub fn merge(
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
        allowed: &[&str],
        env_seed: Option<String>,
    ) -> Result<Self, CliError> {
        for k in file.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Config(format!("config key `{k}` does not apply to this command")));
            }
        }
        let mut values = file;
        values.extend(flags);
        if let Some(s) = env_seed {
            if allowed.contains(&"seed") {
                values.insert("seed".into(), s);
            }
        }
        Ok(Resolved { values })
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => s
                .trim()
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("option `{key}`: cannot parse `{s}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("missing required option `--{key}`")))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.str(key) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(s) => Err(CliError::Config(format!("option `{key}`: expected true or false, got `{s}`"))),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.str(key) {
            None => Ok(None),
            Some(s) => s
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<T>()
                        .map_err(|_| CliError::Config(format!("option `{key}`: cannot parse `{x}`")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let m = parse_str("# c\n; c\n\nnu = 0.5\nn_max=20\n  family =  s2 \n").unwrap();
        assert_eq!(m["nu"], "0.5");
        assert_eq!(m["n-max"], "20");
        assert_eq!(m["family"], "s2");
        assert!(parse_str("nu 0.5").is_err());
        assert!(parse_str("nu=1\nnu=2").is_err());
    }

    #[test]
    fn precedence() {
        let file = parse_str("nu = 0.5\nseed = 1\nbeta = 2").unwrap();
        let flags = BTreeMap::from([("nu".to_string(), "0.7".to_string())]);
        let r = Resolved::merge(file.clone(), flags.clone(), &["nu", "seed", "beta"], Some("9".into())).unwrap();
        assert_eq!(r.str("nu"), Some("0.7"));
        assert_eq!(r.str("beta"), Some("2"));
        assert_eq!(r.str("seed"), Some("9"));
        assert!(Resolved::merge(file, flags, &["nu"], None).is_err());
    }
}
