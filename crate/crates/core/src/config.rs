//! Line-oriented `key=value` configuration and seed derivation.
//!
//! Blank lines and `#` comments are ignored. Later assignments of the same
//! key replace earlier ones, which is how command-line overrides are layered
//! on top of a file.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("key `{key}`: cannot parse {value:?}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

/// Ordered `key=value` map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<KeyValues, ConfigError> {
        let mut kv = KeyValues::default();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            }
            kv.set(key, value.trim());
        }
        Ok(kv)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Applies every entry of `other` on top of `self`.
    pub fn merge(&mut self, other: &KeyValues) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn parsed<T>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| ConfigError::Value {
                key: key.to_string(),
                value: v.to_string(),
                reason: e.to_string(),
            }),
        }
    }

    /// Reads a `lo,hi` pair.
    pub fn range(&self, key: &str) -> Result<Option<(f64, f64)>, ConfigError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let bad = |reason: &str| ConfigError::Value {
            key: key.to_string(),
            value: v.to_string(),
            reason: reason.to_string(),
        };
        let (lo, hi) = v.split_once(',').ok_or_else(|| bad("expected `lo,hi`"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad("bad lower bound"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad("bad upper bound"))?;
        Ok(Some((lo, hi)))
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(ConfigError::UnknownKey(k.to_string())),
            None => Ok(()),
        }
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `stream` under the global seed.
pub fn derive_seed(global: u64, stream: u64) -> u64 {
    splitmix64(global.wrapping_add(splitmix64(stream)))
}

/// Named sub-streams, so independent consumers never share draws.
pub mod stream {
    pub const MAZES: u64 = 1;
    pub const POOL: u64 = 2;
    pub const TUNER: u64 = 3;
    pub const RANDOM_SEARCH: u64 = 4;
    pub const SWEEP: u64 = 5;
    pub const POLICY: u64 = 6;
    pub const GRID: u64 = 7;
}

/// Seeded generator used throughout; ChaCha8 output is stable across releases.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
