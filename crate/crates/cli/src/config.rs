//! Flat `key = value` configuration files and sweep grid files.

use std::collections::HashMap;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "format",
    "n",
    "K",
    "D",
    "alpha",
    "aubry_c",
    "aubry_kbar",
    "aubry_p",
    "N",
    "K_bar",
    "lambda_bar",
    "u_star",
    "profile",
    "geometry",
    "length",
    "tau",
    "delta",
    "eps",
    "p",
    "lambda1",
    "sigma",
    "filter",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: HashMap<String, String>,
}

/// Splits `key = value`, ignoring blank lines and `#` comments.
fn entries(text: &str) -> impl Iterator<Item = (usize, Result<(&str, &str), String>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let parsed = match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
                Ok((k.trim(), v.trim()))
            }
            _ => Err(format!("expected `key = value`, found `{line}`")),
        };
        Some((i + 1, parsed))
    })
}

impl Config {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (line, entry) in entries(text) {
            let (k, v) = entry.map_err(|e| CliError::Input(format!("{source}:{line}: {e}")))?;
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Input(format!("{source}:{line}: unknown key `{k}`")));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(Self { values })
    }

    /// Flag value, else the configured value, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Input(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    /// As [`Config::pick`], falling back to a default.
    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// As [`Config::pick`], failing when the value is absent everywhere.
    pub fn need<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.pick(flag, key)?.ok_or_else(|| {
            CliError::Input(format!("missing required value `{key}` (flag or config)"))
        })
    }
}

/// Sweep grid: comma-separated values for `n`, `K`, `D` and optionally `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: Vec<f64>,
    pub k: Vec<f64>,
    pub d: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Grid {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut axes: HashMap<&str, Vec<f64>> = HashMap::new();
        for (line, entry) in entries(text) {
            let err = |msg: String| CliError::Input(format!("{source}:{line}: {msg}"));
            let (k, v) = entry.map_err(err)?;
            if !matches!(k, "n" | "K" | "D" | "alpha") {
                return Err(err(format!("unknown grid axis `{k}` (expected n, K, D, alpha)")));
            }
            let vals = v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| err(format!("`{}` is not a number", s.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if axes.insert(k, vals).is_some() {
                return Err(err(format!("axis `{k}` given twice")));
            }
        }
        let mut take = |k: &str| {
            axes.remove(k)
                .ok_or_else(|| CliError::Input(format!("{source}: grid axis `{k}` is missing")))
        };
        Ok(Self {
            n: take("n")?,
            k: take("K")?,
            d: take("D")?,
            alpha: take("alpha").unwrap_or_else(|_| vec![1.0]),
        })
    }

    /// Grid points `(n, K, D, alpha)` with `n` varying slowest.
    pub fn points(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &k in &self.k {
                for &d in &self.d {
                    for &a in &self.alpha {
                        out.push((n, k, d, a));
                    }
                }
            }
        }
        out
    }
}
