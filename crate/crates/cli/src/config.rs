//! Flat key-value run configuration: a TOML file of scalars and arrays,
//! overridden by `--set key=value` pairs. Every value read is recorded so the
//! resolved configuration, defaults included, can be echoed into metadata.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Mutex;

use driven_harper::{golden_beta, BetaClass, ModelParams};
use serde_json::{json, Value as Json};
use toml::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, Value>,
    used: Mutex<BTreeSet<String>>,
    resolved: Mutex<BTreeMap<String, Json>>,
}

impl Config {
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
                CliError::config("--config", e.message().to_string())
            })?;
            for (k, v) in table {
                if v.is_table() {
                    return Err(CliError::config(k, "nested tables are not supported"));
                }
                values.insert(k, v);
            }
        }
        for s in sets {
            let (k, v) = parse_set(s)?;
            values.insert(k, v);
        }
        Ok(Self {
            values,
            ..Self::default()
        })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Self {
        Self {
            values: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            ..Self::default()
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.used.lock().unwrap().insert(key.to_string());
        self.values.get(key)
    }

    fn record(&self, key: &str, v: Json) {
        self.resolved.lock().unwrap().insert(key.to_string(), v);
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        let v = match self.raw(key) {
            None => return Ok(None),
            Some(v) => as_f64(key, v)?,
        };
        if !v.is_finite() {
            return Err(CliError::config(key, "must be finite"));
        }
        self.record(key, json!(v));
        Ok(Some(v))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(match self.f64_opt(key)? {
            Some(v) => v,
            None => {
                self.record(key, json!(default));
                default
            }
        })
    }

    pub fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| CliError::config(key, "required key is missing"))
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v <= 0.0 {
            return Err(CliError::config(key, format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        let v = match self.raw(key) {
            None => default,
            Some(v) => as_usize(key, v)?,
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// Like [`Self::usize_or`] but at least `min`.
    pub fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self.usize_or(key, default)?;
        if v < min {
            return Err(CliError::config(key, format!("must be >= {min}, got {v}")));
        }
        Ok(v)
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        let v = match self.raw(key) {
            None => return Ok(None),
            Some(v) => as_usize(key, v)? as u64,
        };
        self.record(key, json!(v));
        Ok(Some(v))
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String> {
        let v = match self.raw(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                return Err(CliError::config(
                    key,
                    format!("expected a string, got {other}"),
                ))
            }
        };
        self.record(key, json!(v));
        Ok(v)
    }

    pub fn f64_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let v = match self.raw(key) {
            None => return Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| as_f64(key, x))
                .collect::<Result<Vec<_>>>()?,
            Some(x) => vec![as_f64(key, x)?],
        };
        if v.is_empty() {
            return Err(CliError::config(key, "list is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(key, "entries must be finite"));
        }
        self.record(key, json!(v));
        Ok(Some(v))
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.f64_list_opt(key)? {
            Some(v) => v,
            None => {
                self.record(key, json!(default));
                default.to_vec()
            }
        })
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let v = match self.raw(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| as_usize(key, x))
                .collect::<Result<Vec<_>>>()?,
            Some(x) => vec![as_usize(key, x)?],
        };
        self.record(key, json!(v));
        Ok(v)
    }

    /// `beta_r` with `beta_q`, or `beta_irrational` (`"golden"` or a number).
    pub fn beta(&self) -> Result<BetaClass> {
        let r = self.u64_opt("beta_r")?;
        let q = self.u64_opt("beta_q")?;
        let irr = self.raw("beta_irrational").cloned();
        let class = match (r, q, irr) {
            (Some(_), Some(_), Some(_)) => {
                return Err(CliError::config(
                    "beta_irrational",
                    "give either beta_r/beta_q or beta_irrational, not both",
                ))
            }
            (Some(r), Some(q), None) => {
                BetaClass::rational(r, q).map_err(|e| CliError::config("beta_q", e.to_string()))?
            }
            (Some(_), None, _) => return Err(CliError::config("beta_q", "required with beta_r")),
            (None, Some(_), _) => return Err(CliError::config("beta_r", "required with beta_q")),
            (None, None, Some(Value::String(s))) if s == "golden" => {
                self.record("beta_irrational", json!("golden"));
                BetaClass::golden()
            }
            (None, None, Some(v)) => {
                let x = as_f64("beta_irrational", &v)?;
                self.record("beta_irrational", json!(x));
                BetaClass::irrational(x)
                    .map_err(|e| CliError::config("beta_irrational", e.to_string()))?
            }
            (None, None, None) => {
                return Err(CliError::config(
                    "beta_irrational",
                    "required key is missing (or give beta_r and beta_q)",
                ))
            }
        };
        Ok(class)
    }

    /// Model constants without the drive frequency.
    pub fn template(&self) -> Result<Template> {
        let beta = self.beta()?;
        Ok(Template {
            j_x: self.f64_or("j_x", 1.0)?,
            j_y: self.f64_or("j_y", 1.0)?,
            alpha: self.f64_req("alpha")?,
            beta,
        })
    }

    pub fn model(&self) -> Result<(ModelParams, BetaClass)> {
        let t = self.template()?;
        let omega = self.f64_req("omega")?;
        Ok((t.at(omega, t.alpha, "omega")?, t.beta))
    }

    /// Fails on keys that were never read, naming the first one.
    pub fn reject_unknown(&self) -> Result<()> {
        let used = self.used.lock().unwrap();
        match self.values.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(CliError::config(k.clone(), "unknown key for this command")),
            None => Ok(()),
        }
    }

    pub fn resolved(&self) -> Json {
        Json::Object(self.resolved.lock().unwrap().clone().into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Template {
    pub j_x: f64,
    pub j_y: f64,
    pub alpha: f64,
    pub beta: BetaClass,
}

impl Template {
    /// Parameters at drive `omega` and flux `alpha`; errors name `key`.
    pub fn at(&self, omega: f64, alpha: f64, key: &str) -> Result<ModelParams> {
        ModelParams::from_drive(self.j_x, self.j_y, alpha, omega, self.beta.value()).map_err(|e| {
            match e {
                driven_harper::Error::InvalidParameter { name, reason } => {
                    let name = match name {
                        "omega" | "beta" | "omega_x" | "omega_y" => key,
                        other => other,
                    };
                    CliError::config(name, reason)
                }
                other => other.into(),
            }
        })
    }
}

pub fn golden() -> f64 {
    golden_beta()
}

fn parse_set(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(s, "expected --set key=value"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::config(s, "empty key in --set"));
    }
    let v = v.trim();
    let parsed = format!("x = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), parsed))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(CliError::config(
            key,
            format!("expected a number, got {other}"),
        )),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(CliError::config(
            key,
            format!("expected a non-negative integer, got {other}"),
        )),
    }
}
