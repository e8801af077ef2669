use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the per-category answer distributions are merged with `p(d | v, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    /// `p(a) = Σ_d p(a | d) p(d)`
    Mixture,
    /// `p(a) ∝ softmax(logits)[a] · p(cat(a))`
    Product,
}

impl CombineMode {
    pub fn name(self) -> &'static str {
        match self {
            CombineMode::Mixture => "mixture",
            CombineMode::Product => "product",
        }
    }
}

impl std::str::FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(CombineMode::Mixture),
            "product" => Ok(CombineMode::Product),
            other => Err(Error::config(format!(
                "unknown combine mode {other:?} (mixture|product)"
            ))),
        }
    }
}

/// Inputs of the caption posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorConditioning {
    /// `q(z | c)`
    CaptionOnly,
    /// `q(z | v, q, c)`, fed `h_c ⊙ j`.
    CaptionImageQuestion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub d_v: usize,
    pub d_e: usize,
    pub d_h: usize,
    pub d_z: usize,
    pub use_caption_latent: bool,
    pub use_category_latent: bool,
    pub combine_mode: CombineMode,
    /// Monte-Carlo samples of `z` per prediction.
    pub k_eval: usize,
    pub posterior_conditioning: PosteriorConditioning,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_v: crate::synthdata::FEATURE_DIM,
            d_e: 32,
            d_h: 64,
            d_z: 16,
            use_caption_latent: true,
            use_category_latent: true,
            combine_mode: CombineMode::Mixture,
            k_eval: 8,
            posterior_conditioning: PosteriorConditioning::CaptionOnly,
        }
    }
}

impl ModelConfig {
    /// All hidden sizes set to `dim`; used for gradient checks.
    pub fn tiny(dim: usize) -> Self {
        Self {
            d_e: dim,
            d_h: dim,
            d_z: dim,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_v", self.d_v),
            ("d_e", self.d_e),
            ("d_h", self.d_h),
            ("d_z", self.d_z),
        ] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.k_eval < 1 {
            return Err(Error::config("k_eval must be at least 1"));
        }
        Ok(())
    }
}
