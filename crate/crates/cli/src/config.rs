//! `key = value` configuration files and flag/file resolution.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys are the long flag names with `-` replaced by `_`. A flag
//! given on the command line wins over the file; the resolved values are
//! recorded so every output can echo them.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Every key any subcommand understands. Keys that do not belong to the
/// running subcommand are ignored, so one file can serve all of them.
pub const KNOWN_KEYS: &[&str] = &[
    "active_window_hours",
    "algo",
    "algos",
    "assignments",
    "at",
    "beta",
    "beyond_accuracy",
    "bins",
    "candidates",
    "d",
    "daily_amplitude",
    "format",
    "k",
    "kmax",
    "labels",
    "lambda",
    "lenient",
    "max_hashtags_per_tweet",
    "max_hours",
    "mean_gap_hours",
    "min_delta",
    "min_hours",
    "mix_norm",
    "n_background_users",
    "n_followees_per_seed",
    "n_seed_users",
    "n_tweets_per_user",
    "neighbors",
    "network",
    "out_dir",
    "p_external",
    "p_individual",
    "p_network",
    "p_social",
    "recency_exponent",
    "rerank",
    "rng_seed",
    "start_time",
    "user",
    "vocab_size",
    "workers",
];

/// Parses a config file body. Later duplicates override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", i + 1));
        };
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key {key:?}", i + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolves parameters from flags, then the config file, then defaults.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            effective: BTreeMap::new(),
        }
    }

    /// The flag if given, else the file value, else `None`. Not echoed.
    pub fn lookup<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    /// Resolved value with a default, echoed in the output metadata.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + serde::Serialize,
        T::Err: Display,
    {
        let value = self.lookup(key, flag)?.unwrap_or(default);
        self.record(key, &value);
        Ok(value)
    }

    /// Resolved value that has no default.
    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + serde::Serialize,
        T::Err: Display,
    {
        let value = self
            .lookup(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter --{}", key.replace('_', "-"))))?;
        self.record(key, &value);
        Ok(value)
    }

    /// A boolean switch: on if the flag is given or the file says `true`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    pub fn record<T: serde::Serialize>(&mut self, key: &str, value: &T) {
        let value = serde_json::to_value(value).expect("config values serialize");
        self.effective.insert(key.to_string(), value);
    }

    pub fn effective(&self) -> &BTreeMap<String, Value> {
        &self.effective
    }

    /// SHA-256 over the command name and the canonical `key=value` lines of
    /// the effective config.
    pub fn config_hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={command}\n"));
        for (k, v) in &self.effective {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let m = parse_config("# c\n\nk = 5\nmix-norm=minmax\n k=7 \n").unwrap();
        assert_eq!(m["k"], "7");
        assert_eq!(m["mix_norm"], "minmax");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(parse_config("bogus = 1").unwrap_err().contains("bogus"));
        assert!(parse_config("k 5").unwrap_err().contains("line 1"));
    }

    #[test]
    fn flags_win_over_file() {
        let mut r = Resolver::new(parse_config("k = 5\nd = 0.7").unwrap());
        assert_eq!(r.get("k", Some(3usize), 10).unwrap(), 3);
        assert_eq!(r.get("d", None, 0.5f64).unwrap(), 0.7);
        assert_eq!(r.get("beta", None, 0.5f64).unwrap(), 0.5);
        assert_eq!(r.effective()["k"], 3);
        assert!(r.require::<i64>("at", None).is_err());
    }

    #[test]
    fn bad_file_value_is_a_usage_error() {
        let mut r = Resolver::new(parse_config("k = many").unwrap());
        assert!(matches!(r.get("k", None, 10usize), Err(CliError::Usage(_))));
    }

    #[test]
    fn hash_tracks_values_and_command() {
        let mut a = Resolver::default();
        a.record("k", &5);
        let mut b = Resolver::default();
        b.record("k", &6);
        assert_ne!(a.config_hash("x"), b.config_hash("x"));
        assert_ne!(a.config_hash("x"), a.config_hash("y"));
        assert_eq!(a.config_hash("x"), a.config_hash("x"));
    }
}
