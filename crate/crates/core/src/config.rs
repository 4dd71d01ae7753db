//! Plain-text `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys may appear at most once. Integer lists accept comma-separated items,
//! inclusive ranges `a..b` and stepped ranges `a..b:step`, e.g.
//! `10..50:10` or `3,6,9`.
//!
//! | key                | value                                  |
//! |--------------------|----------------------------------------|
//! | `experiment`       | preset `1`..`4`; other keys override it |
//! | `users`            | integer list                           |
//! | `resources`        | integer list                           |
//! | `options`          | integer list                           |
//! | `algorithms`       | comma list of algorithm names          |
//! | `repetitions`      | integer, at least 1                    |
//! | `seed`             | base seed                              |
//! | `horizon_per_user` | horizon is `per_user * U + base`       |
//! | `horizon_base`     |                                        |
//! | `slots_required`   | range `lo..hi`                         |
//! | `demand`           | range `lo..hi`, milli-units            |
//! | `price_basis`      | `flat` or `footprint`                  |
//! | `price_scale`      | integer                                |
//! | `price_factor`     | range `lo..hi`, per-mille              |
//! | `price_decay`      | per-mille, `1..=1000`                  |
//! | `slack`            | integer list, strictly increasing      |
//! | `oracle`           | `true` / `false`                       |
//! | `oracle_timeout_s` | seconds per instance                   |
//! | `oracle_max_nodes` | search nodes per instance              |
//! | `timings`          | `true` to record wall-clock runtimes   |

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice (first on line {first})")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("line {line}: bad value for `{key}`: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// A parsed file: key to (line, raw value).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    /// Parses `text`, rejecting keys outside `known`.
    pub fn parse(text: &str, known: &[&str]) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !known.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
            if let Some(&(first, _)) = entries.get(key) {
                return Err(ConfigError::Duplicate { line, key: key.to_string(), first });
            }
            entries.insert(key.to_string(), (line, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            line: self.entries.get(key).map_or(0, |e| e.0),
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// Applies `parse` to the value of `key`, if present.
    pub fn get_with<T>(&self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((_, raw)) => parse(raw).map(Some).map_err(|m| self.bad(key, m)),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get_with(key, |raw| raw.parse::<T>().map_err(|e| format!("{e} (got {raw:?})")))
    }
}

fn number<T: FromStr>(raw: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse::<T>().map_err(|e| format!("{e} (got {:?})", raw.trim()))
}

/// Parses `lo..hi` (inclusive).
pub fn parse_range(raw: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = raw.split_once("..").ok_or_else(|| format!("expected `lo..hi`, got {raw:?}"))?;
    let (lo, hi) = (number::<u32>(lo)?, number::<u32>(hi)?);
    if lo > hi {
        return Err(format!("range {lo}..{hi} is empty"));
    }
    Ok((lo, hi))
}

/// Parses an integer list such as `1, 4..6, 10..50:20`.
pub fn parse_list(raw: &str) -> Result<Vec<u64>, String> {
    const MAX_ITEMS: usize = 100_000;
    let mut out = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err("empty list item".into());
        }
        match item.split_once("..") {
            None => out.push(number::<u64>(item)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, number::<u64>(step)?),
                    None => (rest, 1),
                };
                let (lo, hi) = (number::<u64>(lo)?, number::<u64>(hi)?);
                if step == 0 {
                    return Err("range step must be positive".into());
                }
                if lo > hi {
                    return Err(format!("range {lo}..{hi} is empty"));
                }
                if (hi - lo) / step >= MAX_ITEMS as u64 {
                    return Err(format!("list longer than {MAX_ITEMS} items"));
                }
                out.extend((lo..=hi).step_by(step as usize));
            }
        }
        if out.len() > MAX_ITEMS {
            return Err(format!("list longer than {MAX_ITEMS} items"));
        }
    }
    Ok(out)
}

pub fn parse_bool(raw: &str) -> Result<bool, String> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("10..50:10").unwrap(), vec![10, 20, 30, 40, 50]);
        assert_eq!(parse_list("3, 6,9").unwrap(), vec![3, 6, 9]);
        assert_eq!(parse_list("1..3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_list("5..1").is_err());
        assert!(parse_list("1..4:0").is_err());
        assert!(parse_list("1,,2").is_err());
        assert!(parse_list("0..18446744073709551615").is_err());
        assert_eq!(parse_range("1..12").unwrap(), (1, 12));
        assert!(parse_range("4").is_err());
    }

    #[test]
    fn errors_name_line_and_key() {
        let known = ["users", "seed"];
        let err = KeyValues::parse("users = 1\n\n colour = red\n", &known).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 3, key: "colour".into() });
        assert!(err.to_string().contains("colour"));

        let err = KeyValues::parse("seed = 1\nseed = 2", &known).unwrap_err();
        assert_eq!(err, ConfigError::Duplicate { line: 2, key: "seed".into(), first: 1 });

        assert_eq!(KeyValues::parse("users 4", &known).unwrap_err(), ConfigError::Syntax { line: 1 });

        let kv = KeyValues::parse("# header\nseed = x1 # trailing\n", &known).unwrap();
        let err = kv.get::<u64>("seed").unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { line: 2, ref key, .. } if key == "seed"));
        assert_eq!(kv.get::<u64>("users").unwrap(), None);
    }
}
