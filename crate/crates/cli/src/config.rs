//! Experiment configuration: JSON file plus command-line overrides.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("reading {path}: {err}")]
    Io { path: String, err: String },
}

/// One experiment: a model, a task (formula or automaton, exactly one),
/// iteration budgets, seeds and output settings.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub ltl: Option<PathBuf>,
    #[serde(default)]
    pub nba: Option<PathBuf>,
    #[serde(default)]
    pub n_pre: Option<u64>,
    #[serde(default)]
    pub n_suf: Option<u64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub oracle_max_states: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub stats_flush_interval: Option<usize>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub match_threshold: Option<f64>,
}

pub const DEFAULT_ORACLE_MAX_STATES: u64 = 1_000_000;
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.95;
pub const DEFAULT_STATS_FLUSH: usize = 4096;

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            err: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Fields set on `other` win over this config.
    pub fn overridden_by(mut self, other: &ExperimentConfig) -> Self {
        if other.model.is_some() {
            self.model = other.model.clone();
        }
        if other.ltl.is_some() {
            self.ltl = other.ltl.clone();
        }
        if other.nba.is_some() {
            self.nba = other.nba.clone();
        }
        if other.n_pre.is_some() {
            self.n_pre = other.n_pre;
        }
        if other.n_suf.is_some() {
            self.n_suf = other.n_suf;
        }
        if !other.seeds.is_empty() {
            self.seeds = other.seeds.clone();
        }
        if other.oracle_max_states.is_some() {
            self.oracle_max_states = other.oracle_max_states;
        }
        if other.out.is_some() {
            self.out = other.out.clone();
        }
        if other.stats_flush_interval.is_some() {
            self.stats_flush_interval = other.stats_flush_interval;
        }
        if other.workers.is_some() {
            self.workers = other.workers;
        }
        if other.match_threshold.is_some() {
            self.match_threshold = other.match_threshold;
        }
        self
    }

    pub fn validate_for_planning(&self) -> Result<(), ConfigError> {
        if self.model.is_none() {
            return Err(ConfigError::Invalid("--model is required".into()));
        }
        match (&self.ltl, &self.nba) {
            (Some(_), None) | (None, Some(_)) => {}
            (None, None) => {
                return Err(ConfigError::Invalid(
                    "exactly one of --ltl or --nba is required".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "--ltl and --nba are mutually exclusive".into(),
                ))
            }
        }
        if self.n_pre.is_some_and(|n| n == 0) || self.n_suf.is_some_and(|n| n == 0) {
            return Err(ConfigError::Invalid(
                "iteration budgets must be at least 1".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("at least one seed is required".into()));
        }
        Ok(())
    }
}
