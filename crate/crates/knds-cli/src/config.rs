//! Flat key=value configuration files: `#` starts a comment, blank lines
//! are skipped, values are scalars or comma-separated lists.

use std::collections::BTreeMap;

use knds_core::geometry::BlackHoleParams;

#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Config {
    pub fn parse(path: &str, text: &str) -> Result<Config, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{path}:{}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn load(path: &str) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
        Config::parse(path, &text)
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self
            .entries
            .get(key)
            .ok_or_else(|| ConfigError(format!("missing key {key}")))?;
        raw.parse()
            .map_err(|_| ConfigError(format!("key {key}: {raw:?} is not a number")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| ConfigError(format!("key {key}: {raw:?} is not a number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| ConfigError(format!("key {key}: {raw:?} is not an integer"))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse()
                        .map_err(|_| ConfigError(format!("key {key}: {tok:?} is not a number")))
                })
                .collect(),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Primary parameter set (keys M, Q, a, Lambda, q, c0, K).
    pub fn params(&self) -> Result<BlackHoleParams, ConfigError> {
        Ok(BlackHoleParams::new(
            self.f64_req("M")?,
            self.f64_req("Q")?,
            self.f64_req("a")?,
            self.f64_req("Lambda")?,
            self.f64_req("q")?,
        )
        .with_gauge(self.f64_or("c0", 0.0)?, self.f64_or("K", 0.0)?))
    }

    /// Optional second parameter set for `compare` (suffix-2 keys).
    pub fn params2(&self) -> Result<Option<BlackHoleParams>, ConfigError> {
        if !self.has("M2") {
            return Ok(None);
        }
        let base = self.params()?;
        Ok(Some(
            BlackHoleParams::new(
                self.f64_req("M2")?,
                self.f64_or("Q2", base.charge)?,
                self.f64_or("a2", base.spin)?,
                self.f64_or("Lambda2", base.cosmological)?,
                self.f64_or("q2", base.field_charge)?,
            )
            .with_gauge(self.f64_or("c02", 0.0)?, self.f64_or("K2", 0.0)?),
        ))
    }
}
