//! Layered run configuration.
//!
//! Values are resolved in order default < preset < file < flag, and every
//! field remembers which layer set it. Config files are flat `key=value`
//! text; `#` starts a comment. [`RunConfig::render`] writes a file that
//! resolves back to the same configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::store::ColumnOrder;
use crate::trainer::TrainConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("unknown preset `{0}` (expected wn18, fb15k, wn11 or fb13)")]
    UnknownPreset(String),
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Default,
    Preset,
    File,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::Preset => "preset",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}

/// Published best configurations, all with bern sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Wn18,
    Fb15k,
    Wn11,
    Fb13,
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wn18" => Ok(Preset::Wn18),
            "fb15k" => Ok(Preset::Fb15k),
            "wn11" => Ok(Preset::Wn11),
            "fb13" => Ok(Preset::Fb13),
            _ => Err(ConfigError::UnknownPreset(s.to_owned())),
        }
    }
}

impl Preset {
    /// `(key, value)` pairs the preset sets.
    pub fn values(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Preset::Wn18 => &[
                ("learning_rate", "0.001"),
                ("dim", "100"),
                ("margin", "2.5"),
                ("crp_beta", "0.05"),
                ("sampling", "bern"),
                ("epochs", "2000"),
                ("labeled", "false"),
            ],
            Preset::Fb15k => &[
                ("learning_rate", "0.0015"),
                ("dim", "400"),
                ("margin", "3.0"),
                ("crp_beta", "0.1"),
                ("sampling", "bern"),
                ("epochs", "2000"),
                ("labeled", "false"),
            ],
            Preset::Wn11 => &[
                ("learning_rate", "0.001"),
                ("dim", "50"),
                ("margin", "6.0"),
                ("crp_beta", "0.1"),
                ("sampling", "bern"),
                ("epochs", "2000"),
                ("labeled", "true"),
            ],
            Preset::Fb13 => &[
                ("learning_rate", "0.002"),
                ("dim", "400"),
                ("margin", "3.0"),
                ("crp_beta", "0.1"),
                ("sampling", "bern"),
                ("epochs", "2000"),
                ("labeled", "true"),
            ],
        }
    }
}

pub const KEYS: &[&str] = &[
    "data",
    "columns",
    "labeled",
    "learning_rate",
    "dim",
    "margin",
    "crp_beta",
    "reg_c",
    "epochs",
    "sampling",
    "variance_sum",
    "m_max",
    "weight_floor",
    "seed",
    "batch_size",
    "spawn_every",
    "learn_variance",
    "checkpoint_every",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub data: Option<PathBuf>,
    pub columns: ColumnOrder,
    pub labeled: bool,
    /// Epochs between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
    provenance: BTreeMap<&'static str, Source>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            data: None,
            columns: ColumnOrder::default(),
            labeled: false,
            checkpoint_every: 0,
            provenance: KEYS.iter().map(|k| (*k, Source::Default)).collect(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: e.to_string(),
    })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str, source: Source) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let t = &mut self.train;
        match key.as_str() {
            "data" => self.data = Some(PathBuf::from(value)),
            "columns" => self.columns = parse(&key, value)?,
            "labeled" => self.labeled = parse(&key, value)?,
            "learning_rate" | "lr" => t.learning_rate = parse(&key, value)?,
            "dim" => t.dim = parse(&key, value)?,
            "margin" | "gamma" => t.margin = parse(&key, value)?,
            "crp_beta" | "beta" => t.crp_beta = parse(&key, value)?,
            "reg_c" => t.reg_c = parse(&key, value)?,
            "epochs" => t.epochs = parse(&key, value)?,
            "sampling" => t.sampling = parse(&key, value)?,
            "variance_sum" => t.variance_sum = parse(&key, value)?,
            "m_max" => t.m_max = parse(&key, value)?,
            "weight_floor" => t.weight_floor = parse(&key, value)?,
            "seed" => t.seed = parse(&key, value)?,
            "batch_size" => t.batch_size = parse(&key, value)?,
            "spawn_every" => t.spawn_every = parse(&key, value)?,
            "learn_variance" => t.learn_variance = parse(&key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse(&key, value)?,
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        let canonical = match key.as_str() {
            "lr" => "learning_rate",
            "gamma" => "margin",
            "beta" => "crp_beta",
            k => KEYS.iter().find(|c| **c == k).copied().expect("matched above"),
        };
        self.provenance.insert(canonical, source);
        Ok(())
    }

    pub fn apply_preset(&mut self, preset: Preset) -> Result<(), ConfigError> {
        for (k, v) in preset.values() {
            self.set(k, v, Source::Preset)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v, Source::File)?;
        }
        Ok(())
    }

    /// Resolves defaults, then preset, then file text, then flag pairs.
    pub fn resolve(
        preset: Option<Preset>,
        file: Option<&str>,
        flags: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(p) = preset {
            cfg.apply_preset(p)?;
        }
        if let Some(text) = file {
            cfg.apply_file(text)?;
        }
        for (k, v) in flags {
            cfg.set(k, v, Source::Flag)?;
        }
        cfg.train
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.provenance.get(key).copied()
    }

    fn value(&self, key: &str) -> Option<String> {
        let t = &self.train;
        Some(match key {
            "data" => self.data.as_ref()?.display().to_string(),
            "columns" => self.columns.to_string(),
            "labeled" => self.labeled.to_string(),
            "learning_rate" => t.learning_rate.to_string(),
            "dim" => t.dim.to_string(),
            "margin" => t.margin.to_string(),
            "crp_beta" => t.crp_beta.to_string(),
            "reg_c" => t.reg_c.to_string(),
            "epochs" => t.epochs.to_string(),
            "sampling" => t.sampling.to_string(),
            "variance_sum" => t.variance_sum.to_string(),
            "m_max" => t.m_max.to_string(),
            "weight_floor" => t.weight_floor.to_string(),
            "seed" => t.seed.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "spawn_every" => t.spawn_every.to_string(),
            "learn_variance" => t.learn_variance.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            _ => return None,
        })
    }

    /// Resolved `(key, value)` pairs in canonical order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .filter_map(|k| self.value(k).map(|v| ((*k).to_owned(), v)))
            .collect()
    }

    /// Config-file text with each line annotated by its source layer.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let src = self.source(&k).unwrap_or(Source::Default);
            s.push_str(&format!("{k}={v}  # {src}\n"));
        }
        s
    }
}
