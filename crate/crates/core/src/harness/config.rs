use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latentvqa::ModelConfig;

/// Optimizer, schedule and model settings for one training run.
///
/// Missing fields in a config file take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// `beta` rises linearly from 0 to 1 over this many optimizer steps.
    pub beta_anneal_steps: usize,
    pub seed: u64,
    /// Monte-Carlo samples used for validation during training.
    pub eval_k: usize,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch_size: 32,
            epochs: 30,
            beta_anneal_steps: 500,
            seed: 7,
            eval_k: 8,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::config(format!("lr must be positive, got {}", self.lr)));
        }
        for (name, v) in [
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("beta_anneal_steps", self.beta_anneal_steps),
            ("eval_k", self.eval_k),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        self.model.validate()
    }

    /// KL weight at optimizer step `step` (0-based count of completed steps).
    pub fn beta(&self, step: usize) -> f64 {
        beta_schedule(step, self.beta_anneal_steps)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `min(step / w, 1)`.
pub fn beta_schedule(step: usize, w: usize) -> f64 {
    if w == 0 || step >= w {
        1.0
    } else {
        step as f64 / w as f64
    }
}
