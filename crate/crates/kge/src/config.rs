//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment. Command-line overrides are
//! applied after the file, and every command writes the resolved settings
//! next to its outputs as `config.resolved`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kge_core::probe::ProbeConfig;
use kge_core::{ModelConfig, ModelKind, Norm, TrainConfig};

use crate::error::{Error, Result};

/// Known keys with their defaults.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("workers", "1"),
    ("model", "transe"),
    ("dim", "512"),
    ("margin", "6"),
    ("norm", "1"),
    ("adversarial_temperature", "1"),
    ("regularization", "0"),
    ("learning_rate", "0.0001"),
    ("num_negative", "60"),
    ("num_epoch", "2000"),
    ("batch_size", "1024"),
    ("eval_every", "50"),
    ("valid_sample", "5000"),
    ("full_valid", "false"),
    ("probe_dropout", "0.1"),
    ("probe_train_fraction", "0.9"),
    ("probe_epochs", "100"),
    ("probe_learning_rate", "0.1"),
    ("probe_batch_size", "256"),
    ("bootstrap_samples", "10000"),
    ("percentile", "95"),
    ("train_file", ""),
    ("valid_file", ""),
    ("test_file", ""),
    ("closure_file", ""),
    ("labels_file", ""),
    ("output", ""),
];

/// Offsets added to `seed` for each consumer of randomness.
pub mod seed_offset {
    pub const SPLIT: u64 = 0;
    pub const INIT: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const PROBE: u64 = 3;
    pub const POWER: u64 = 4;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: KEYS.iter().map(|(k, v)| (*k, v.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let Some((k, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(Error::Input(format!("unknown config key `{key}`")));
        };
        self.values.insert(k, value.trim().to_string());
        Ok(())
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Applies `key=value` overrides.
    pub fn apply<'a>(&mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("override `{o}` is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("unregistered config key {key}"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| Error::Input(format!("config key `{key}`: cannot parse `{raw}`")))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let raw = self.raw(key);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key)
            .ok_or_else(|| Error::Input(format!("`{key}` is required")))
    }

    pub fn seed(&self, offset: u64) -> Result<u64> {
        Ok(self.get::<u64>("seed")?.wrapping_add(offset))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.resolved");
        let mut w = crate::tsv::create(&path)?;
        w.write_all(self.render().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&path, e))
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let kind: ModelKind = self.get_with("model")?;
        let norm: Norm = self.get_with("norm")?;
        let cfg = ModelConfig::new(kind, self.get("dim")?)
            .with_margin(self.get("margin")?)
            .with_norm(norm);
        cfg.validate()?;
        Ok(cfg)
    }

    fn get_with<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .parse()
            .map_err(|e: T::Err| Error::Input(format!("config key `{key}`: {e}")))
    }

    pub fn train(&self) -> Result<TrainConfig> {
        let full: bool = self.get("full_valid")?;
        let cfg = TrainConfig {
            learning_rate: self.get("learning_rate")?,
            num_negative: self.get("num_negative")?,
            num_epoch: self.get("num_epoch")?,
            batch_size: self.get("batch_size")?,
            adversarial_temperature: self.get("adversarial_temperature")?,
            regularization: self.get("regularization")?,
            eval_every: self.get("eval_every")?,
            valid_sample: if full {
                None
            } else {
                Some(self.get("valid_sample")?)
            },
            seed: self.seed(seed_offset::TRAIN)?,
            workers: self.get("workers")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn probe(&self) -> Result<ProbeConfig> {
        let cfg = ProbeConfig {
            dropout: self.get("probe_dropout")?,
            train_fraction: self.get("probe_train_fraction")?,
            epochs: self.get("probe_epochs")?,
            learning_rate: self.get("probe_learning_rate")?,
            batch_size: self.get("probe_batch_size")?,
            seed: self.seed(seed_offset::PROBE)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn workers(&self) -> Result<usize> {
        let w: usize = self.get("workers")?;
        if w == 0 {
            return Err(Error::Input("`workers` must be positive".into()));
        }
        Ok(w)
    }
}
