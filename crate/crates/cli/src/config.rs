//! Line-oriented `key = value` device configuration.
//!
//! Blank lines and `#` comments are ignored. Keys may appear once. Result
//! files written by `cube` and `optimize` use the same syntax with extra
//! `result.*` keys, so they can be read back as configurations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use orthohaptic::device::DeviceParams;
use orthohaptic::orthoglide::{Orthoglide, OrthoglideParams};
use orthohaptic::wrist::{WristKind, WristLimits};
use orthohaptic::Tolerances;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub leg_length: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub wrist: WristKind,
    pub psi: Option<f64>,
    pub limit_deg: f64,
    pub grid_n: usize,
    pub required_edge: Option<f64>,
    pub margin: f64,
    pub tol: Tolerances,
    /// `result.*` entries, keyed without the prefix.
    pub results: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            leg_length: 1.0,
            rho_min: 0.1,
            rho_max: 1.9,
            wrist: WristKind::Hybrid2R1R,
            psi: None,
            limit_deg: 45.0,
            grid_n: 21,
            required_edge: None,
            margin: 0.0,
            tol: Tolerances::default(),
            results: BTreeMap::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "L",
    "rho_min",
    "rho_max",
    "wrist",
    "psi",
    "limit_deg",
    "grid_n",
    "required_edge",
    "margin",
    "tol_unit",
    "tol_residual",
    "tol_singular",
    "tol_grid_match",
];

pub const RESULT_PREFIX: &str = "result.";

fn wrist_name(kind: WristKind) -> &'static str {
    match kind {
        WristKind::Hybrid2R1R => "hybrid",
        WristKind::Spherical3R => "spherical",
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: body.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: body.to_string(),
                });
            }
            if seen.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::Value {
            line,
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let number = || -> Result<f64, ConfigError> {
            let v: f64 = value.parse().map_err(|_| bad("not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad("must be finite"))
            }
        };
        let positive = || -> Result<f64, ConfigError> {
            let v = number()?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(bad("must be positive"))
            }
        };
        if let Some(name) = key.strip_prefix(RESULT_PREFIX) {
            if name.is_empty() {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            self.results.insert(name.to_string(), number()?);
            return Ok(());
        }
        match key {
            "L" => self.leg_length = positive()?,
            "rho_min" => self.rho_min = number()?,
            "rho_max" => self.rho_max = number()?,
            "wrist" => {
                self.wrist = match value {
                    "hybrid" => WristKind::Hybrid2R1R,
                    "spherical" => WristKind::Spherical3R,
                    _ => return Err(bad("expected `hybrid` or `spherical`")),
                }
            }
            "psi" => {
                let v = number()?;
                if v < 1.0 {
                    return Err(bad("must be >= 1"));
                }
                self.psi = Some(v);
            }
            "limit_deg" => {
                let v = number()?;
                if !(v > 0.0 && v < 90.0) {
                    return Err(bad("must lie in (0, 90)"));
                }
                self.limit_deg = v;
            }
            "grid_n" => {
                let v: usize = value.parse().map_err(|_| bad("not a positive integer"))?;
                if v == 0 {
                    return Err(bad("must be at least 1"));
                }
                self.grid_n = v;
            }
            "required_edge" => self.required_edge = Some(positive()?),
            "margin" => {
                let v = number()?;
                if v < 0.0 {
                    return Err(bad("must be >= 0"));
                }
                self.margin = v;
            }
            "tol_unit" => self.tol.unit = positive()?,
            "tol_residual" => self.tol.residual = positive()?,
            "tol_singular" => self.tol.singular = positive()?,
            "tol_grid_match" => self.tol.grid_match = positive()?,
            _ => {
                debug_assert!(!KEYS.contains(&key));
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rho_min > self.rho_max {
            return Err(ConfigError::Inconsistent("rho_min exceeds rho_max".into()));
        }
        self.tol
            .validate()
            .map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    /// Canonical text: every key in a fixed order, doubles in shortest
    /// round-trip form, so `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        // Debug formatting is shortest round-trip and switches to exponent
        // notation for tiny tolerances.
        let num = |x: f64| format!("{x:?}");
        put("L", num(self.leg_length));
        put("rho_min", num(self.rho_min));
        put("rho_max", num(self.rho_max));
        put("wrist", wrist_name(self.wrist).to_string());
        if let Some(psi) = self.psi {
            put("psi", num(psi));
        }
        put("limit_deg", num(self.limit_deg));
        put("grid_n", self.grid_n.to_string());
        if let Some(edge) = self.required_edge {
            put("required_edge", num(edge));
        }
        put("margin", num(self.margin));
        put("tol_unit", num(self.tol.unit));
        put("tol_residual", num(self.tol.residual));
        put("tol_singular", num(self.tol.singular));
        put("tol_grid_match", num(self.tol.grid_match));
        for (k, v) in &self.results {
            put(&format!("{RESULT_PREFIX}{k}"), num(*v));
        }
        out
    }

    pub fn stage(&self) -> Orthoglide {
        Orthoglide::with_tolerances(
            OrthoglideParams {
                leg_length: self.leg_length,
                rho_min: self.rho_min,
                rho_max: self.rho_max,
                ..OrthoglideParams::default()
            },
            self.tol,
        )
    }

    pub fn device(&self) -> DeviceParams {
        let mut d = DeviceParams::new(self.stage(), self.wrist);
        d.limits = WristLimits {
            max_angle: self.limit_deg.to_radians(),
        };
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("# nothing\n\n   \n").unwrap(), Config::default());
    }

    #[test]
    fn parses_all_keys() {
        let text = "L = 2\nrho_min=0.2\nrho_max = 3.5 # trailing comment\nwrist = spherical\npsi = 2\n\
                    limit_deg = 40\ngrid_n = 9\nrequired_edge = 0.5\nmargin = 0.01\ntol_residual = 1e-8\n\
                    result.edge = 0.95\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.leg_length, 2.0);
        assert_eq!(c.rho_max, 3.5);
        assert_eq!(c.wrist, WristKind::Spherical3R);
        assert_eq!(c.psi, Some(2.0));
        assert_eq!(c.grid_n, 9);
        assert_eq!(c.tol.residual, 1e-8);
        assert_eq!(c.results.get("edge"), Some(&0.95));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("L = 1\nlegs = 4\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 2,
                key: "legs".into()
            }
        );
        assert!(err.to_string().contains("legs"));
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "L = -1",
            "L = nan",
            "L = inf",
            "limit_deg = 90",
            "limit_deg = 0",
            "psi = 0.5",
            "grid_n = 0",
            "grid_n = 2.5",
            "wrist = delta",
            "rho_min = 2\nrho_max = 1",
            "L = 1\nL = 2",
            "just words",
            "= 3",
            "result. = 1",
        ] {
            assert!(Config::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn serialization_round_trips() {
        let text = "wrist = spherical\nL = 0.7856445\nrho_min = 0.1 \npsi=2\nresult.edge = 0.1\n";
        let c = Config::parse(text).unwrap();
        let once = c.serialize();
        let again = Config::parse(&once).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.serialize(), once);
    }

    #[test]
    fn awkward_doubles_survive() {
        let c = Config {
            leg_length: 0.1 + 0.2,
            rho_max: 1.0 / 3.0,
            rho_min: -1e-300,
            ..Config::default()
        };
        assert_eq!(Config::parse(&c.serialize()).unwrap(), c);
    }
}
