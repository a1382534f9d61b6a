//! Flat, dotted-key view of a TOML configuration.
//!
//! `[grid]\nn = 512` and `"grid.n" = 512` are the same key. Every key must
//! appear in [`KNOWN_KEYS`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use kdvb::dynamics::{DampingKind, NonlinearForm};
use kdvb::{DampingSpec, InitialCondition, NonlinearitySpec, SimConfig};
use toml::Value;

use crate::presets;

pub const KNOWN_KEYS: &[&str] = &[
    "grid.half_length",
    "grid.n",
    "time.dt",
    "time.horizon",
    "time.snapshot_every",
    "time.tail_threshold",
    "time.blowup_guard",
    "nonlinearity.form",
    "nonlinearity.p",
    "nonlinearity.growth_constant",
    "damping.kind",
    "damping.lambda0",
    "damping.amp",
    "damping.alpha",
    "damping.beta",
    "damping.width",
    "ic.kind",
    "ic.amplitude",
    "ic.width",
    "ic.center",
    "ic.k",
    "ic.seed",
    "ic.cutoff",
    "output.dir",
    "sweep.p",
    "sweep.lambda0",
    "sweep.amp",
    "sweep.amplitude",
    "sweep.window",
    "carleman.half_width",
    "carleman.x0",
    "carleman.offset",
    "carleman.epsilon",
    "carleman.horizon",
    "carleman.s_values",
    "carleman.grid_n",
    "carleman.ratio_grid_n",
    "carleman.ratio_time_n",
    "carleman.s_factor",
    "picard.t_loc",
    "picard.iterations",
    "picard.substeps",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Maps parameter names reported by the numerical core onto config keys.
pub fn key_for_core_name(name: &str) -> String {
    let key = match name {
        "alpha" | "amp" | "lambda0" | "width" => return format!("damping.{name}"),
        "p" | "growth_constant" => return format!("nonlinearity.{name}"),
        "cutoff" => "ic.cutoff",
        "dt" => "time.dt",
        "s_values" | "grid_n" => return format!("carleman.{name}"),
        "grid_n, time_n" => "carleman.ratio_grid_n",
        other => other,
    };
    key.to_string()
}

/// Converts a core error into a config error when it names a parameter.
pub fn from_core(err: kdvb::Error) -> ConfigError {
    match err {
        kdvb::Error::InvalidParameter { name, reason } => ConfigError::new(key_for_core_name(name), reason),
        kdvb::Error::InvalidGrid(reason) => ConfigError::new("grid.n", reason),
        other => ConfigError::new("config", other.to_string()),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub source: String,
    values: BTreeMap<String, Value>,
}

impl Config {
    /// Reads a file, or an embedded preset when `spec` is `preset:NAME`.
    pub fn load(spec: &str) -> Result<Self, ConfigError> {
        let text = if let Some(name) = spec.strip_prefix("preset:") {
            presets::get(name)
                .ok_or_else(|| {
                    ConfigError::new(
                        "--config",
                        format!("unknown preset `{name}`; known: {}", presets::names().join(", ")),
                    )
                })?
                .to_string()
        } else {
            std::fs::read_to_string(Path::new(spec))
                .map_err(|e| ConfigError::new("--config", format!("cannot read {spec}: {e}")))?
        };
        let mut cfg = Self::parse(&text)?;
        cfg.source = spec.to_string();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::new("config", e.message().to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", table, &mut values)?;
        Ok(Self {
            source: String::new(),
            values,
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => as_f64(v).ok_or_else(|| ConfigError::new(key, "expected a number")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(ConfigError::new(key, "expected a non-negative integer")),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::String(s)) => Ok(s),
            Some(_) => Err(ConfigError::new(key, "expected a string")),
        }
    }

    /// A list of numbers; a bare number counts as a one-element list.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => {
                let out: Option<Vec<f64>> = items.iter().map(as_f64).collect();
                match out {
                    Some(v) if !v.is_empty() => Ok(Some(v)),
                    Some(_) => Err(ConfigError::new(key, "list must not be empty")),
                    None => Err(ConfigError::new(key, "expected a list of numbers")),
                }
            }
            Some(v) => as_f64(v)
                .map(|x| Some(vec![x]))
                .ok_or_else(|| ConfigError::new(key, "expected a number or a list of numbers")),
        }
    }

    pub fn output_dir(&self) -> Result<String, ConfigError> {
        Ok(self.str_or("output.dir", "out")?.to_string())
    }

    /// Builds and validates a simulation config. `seed` overrides `ic.seed`.
    pub fn sim_config(&self, seed: Option<u64>) -> Result<SimConfig, ConfigError> {
        let d = SimConfig::default();
        let half_length = self.f64_or("grid.half_length", d.half_length)?;
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(ConfigError::new("grid.half_length", "must be positive"));
        }
        let n_points = self.usize_or("grid.n", d.n_points)?;
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(ConfigError::new("grid.n", "must be a power of two >= 16"));
        }

        let form_name = self.str_or("nonlinearity.form", "identity")?;
        let form = NonlinearForm::parse(form_name).ok_or_else(|| {
            ConfigError::new(
                "nonlinearity.form",
                format!("unknown form `{form_name}` (none, identity, signed_power, abs_power)"),
            )
        })?;
        let p = self.f64_or("nonlinearity.p", 1.0)?;
        let growth = self.f64_or("nonlinearity.growth_constant", p.max(1.0))?;
        let nonlinearity = NonlinearitySpec::new(form, p, growth).map_err(from_core)?;

        let damping = self.damping()?;
        damping.validate().map_err(from_core)?;

        let initial_condition = self.initial_condition(seed)?;

        let cfg = SimConfig {
            half_length,
            n_points,
            dt: self.f64_or("time.dt", d.dt)?,
            horizon: self.f64_or("time.horizon", d.horizon)?,
            snapshot_every: self.usize_or("time.snapshot_every", 0)?,
            nonlinearity,
            damping,
            initial_condition,
            tail_threshold: self.f64_or("time.tail_threshold", d.tail_threshold)?,
            blowup_guard: self.f64_or("time.blowup_guard", d.blowup_guard)?,
        };
        let cfg = if cfg.snapshot_every == 0 {
            // Default cadence: ten snapshots per run.
            let steps = cfg.steps().map_err(from_core)?;
            let every = if steps % 10 == 0 { steps / 10 } else { steps };
            SimConfig {
                snapshot_every: every,
                ..cfg
            }
        } else {
            cfg
        };
        cfg.validate().map_err(from_core)?;
        let grid = cfg.grid().map_err(from_core)?;
        cfg.initial_condition.sample(&grid).map_err(from_core)?;
        Ok(cfg)
    }

    fn damping(&self) -> Result<DampingSpec, ConfigError> {
        let kind_name = self.str_or("damping.kind", "zero")?;
        let kind = DampingKind::parse(kind_name).ok_or_else(|| {
            ConfigError::new(
                "damping.kind",
                format!("unknown kind `{kind_name}` (zero, constant, indefinite, localized)"),
            )
        })?;
        let lambda0 = self.f64_or("damping.lambda0", 0.0)?;
        Ok(match kind {
            DampingKind::Zero => DampingSpec::Zero,
            DampingKind::Constant => DampingSpec::Constant { lambda0 },
            DampingKind::Indefinite => DampingSpec::Indefinite {
                lambda0,
                bump_amplitude: self.f64_or("damping.amp", 0.0)?,
            },
            DampingKind::Localized => DampingSpec::Localized {
                lambda0,
                alpha: self.f64_or("damping.alpha", -5.0)?,
                beta: self.f64_or("damping.beta", 5.0)?,
                width: self.f64_or("damping.width", 1.0)?,
            },
        })
    }

    fn initial_condition(&self, seed: Option<u64>) -> Result<InitialCondition, ConfigError> {
        let kind = self.str_or("ic.kind", "gaussian")?;
        let amplitude = self.f64_or("ic.amplitude", 1.0)?;
        Ok(match kind {
            "gaussian" => InitialCondition::Gaussian {
                amplitude,
                width: self.f64_or("ic.width", 2.0)?,
                center: self.f64_or("ic.center", 0.0)?,
            },
            "single_mode" => InitialCondition::SingleMode {
                k: self.usize_or("ic.k", 1)?,
                amplitude,
            },
            "random" => InitialCondition::RandomBandLimited {
                seed: match seed {
                    Some(s) => s,
                    None => self.usize_or("ic.seed", 0)? as u64,
                },
                cutoff: self.usize_or("ic.cutoff", 32)?,
                amplitude,
            },
            "zero" => InitialCondition::Zero,
            other => {
                return Err(ConfigError::new(
                    "ic.kind",
                    format!("unknown kind `{other}` (gaussian, single_mode, random, zero)"),
                ))
            }
        })
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, Value>) -> Result<(), ConfigError> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => flatten(&key, inner, out)?,
            other => {
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(ConfigError::new(key, "unknown key"));
                }
                if out.insert(key.clone(), other).is_some() {
                    return Err(ConfigError::new(key, "given twice"));
                }
            }
        }
    }
    Ok(())
}
