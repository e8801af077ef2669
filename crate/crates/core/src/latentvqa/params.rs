use std::collections::BTreeMap;

use super::ModelConfig;
use crate::encoders::{ImageEncoderParams, TextEncoderParams};
use crate::error::{Error, Result};
use crate::numcore::{ParamAccess, RngStream, Tensor};

/// Every learnable tensor of the model, generative (θ) and variational (φ).
///
/// Each tensor has a unique dotted name (`"prior.w_mean"`, ...) used for
/// initialization streams, gradient-check reports and checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LvVqaParams {
    pub image: ImageEncoderParams,
    pub question: TextEncoderParams,
    pub caption: TextEncoderParams,
    /// Prior head over `j`: mean and log-variance, `d_z × d_h` / `d_z`.
    pub prior_w_mean: Tensor,
    pub prior_b_mean: Tensor,
    pub prior_w_logvar: Tensor,
    pub prior_b_logvar: Tensor,
    /// Posterior head over the caption encoding.
    pub post_w_mean: Tensor,
    pub post_b_mean: Tensor,
    pub post_w_logvar: Tensor,
    pub post_b_logvar: Tensor,
    /// Category classifier, `|D| × d_h` / `|D|`.
    pub category_w: Tensor,
    pub category_b: Tensor,
    /// Answer head: `u = tanh(W_j j + W_z z + b_u)`, `logits = W_a u + b_a`.
    pub answer_w_joint: Tensor,
    pub answer_w_latent: Tensor,
    pub answer_b_hidden: Tensor,
    pub answer_w_out: Tensor,
    pub answer_b_out: Tensor,
}

impl LvVqaParams {
    /// All-zero parameters with the shapes implied by the configuration.
    pub fn zeros(cfg: &ModelConfig, vocab_size: usize, n_answers: usize, n_categories: usize) -> Self {
        let (d_h, d_z) = (cfg.d_h, cfg.d_z);
        Self {
            image: ImageEncoderParams::zeros(cfg.d_v, d_h),
            question: TextEncoderParams::zeros(vocab_size, cfg.d_e, d_h),
            caption: TextEncoderParams::zeros(vocab_size, cfg.d_e, d_h),
            prior_w_mean: Tensor::zeros(&[d_z, d_h]),
            prior_b_mean: Tensor::zeros(&[d_z]),
            prior_w_logvar: Tensor::zeros(&[d_z, d_h]),
            prior_b_logvar: Tensor::zeros(&[d_z]),
            post_w_mean: Tensor::zeros(&[d_z, d_h]),
            post_b_mean: Tensor::zeros(&[d_z]),
            post_w_logvar: Tensor::zeros(&[d_z, d_h]),
            post_b_logvar: Tensor::zeros(&[d_z]),
            category_w: Tensor::zeros(&[n_categories, d_h]),
            category_b: Tensor::zeros(&[n_categories]),
            answer_w_joint: Tensor::zeros(&[d_h, d_h]),
            answer_w_latent: Tensor::zeros(&[d_h, d_z]),
            answer_b_hidden: Tensor::zeros(&[d_h]),
            answer_w_out: Tensor::zeros(&[n_answers, d_h]),
            answer_b_out: Tensor::zeros(&[n_answers]),
        }
    }

    /// Weights uniform in `±1/√fan_in` (fan-in = column count), biases zero.
    /// Each tensor draws from its own child stream keyed by its name, so
    /// adding a tensor never shifts another tensor's initial values.
    pub fn init(cfg: &ModelConfig, vocab_size: usize, n_answers: usize, n_categories: usize, seed: u64) -> Self {
        let mut params = Self::zeros(cfg, vocab_size, n_answers, n_categories);
        for (name, t) in params.named_tensors_mut() {
            if t.shape().len() < 2 {
                continue;
            }
            let bound = 1.0 / (t.cols() as f64).sqrt();
            let mut rng = RngStream::child(seed, name_key(&name));
            t.data_mut()
                .iter_mut()
                .for_each(|x| *x = rng.uniform_range(-bound, bound));
        }
        params
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.named_tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn n_values(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn to_map(&self) -> BTreeMap<String, Tensor> {
        self.named_tensors().into_iter().map(|(n, t)| (n, t.clone())).collect()
    }

    /// Fills parameters shaped for `cfg` from a name → tensor map; every
    /// expected name must be present with the expected shape, and no extras.
    pub fn from_map(
        cfg: &ModelConfig,
        vocab_size: usize,
        n_answers: usize,
        n_categories: usize,
        map: &BTreeMap<String, Tensor>,
    ) -> Result<Self> {
        let mut params = Self::zeros(cfg, vocab_size, n_answers, n_categories);
        let mut used = 0;
        for (name, t) in params.named_tensors_mut() {
            let src = map
                .get(&name)
                .ok_or_else(|| Error::config(format!("checkpoint is missing parameter {name:?}")))?;
            if src.shape() != t.shape() {
                return Err(Error::config(format!(
                    "parameter {name:?} has shape {:?}, model expects {:?}",
                    src.shape(),
                    t.shape()
                )));
            }
            *t = src.clone();
            used += 1;
        }
        if used != map.len() {
            return Err(Error::config("checkpoint has unknown parameters"));
        }
        Ok(params)
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &Self) {
        for ((_, a), (_, b)) in self.named_tensors_mut().into_iter().zip(other.named_tensors()) {
            a.add_slice(b.data());
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, t) in self.named_tensors_mut() {
            t.scale(factor);
        }
    }
}

/// FNV-1a of the parameter name.
fn name_key(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl ParamAccess for LvVqaParams {
    fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out: Vec<(String, &Tensor)> = Vec::with_capacity(25);
        out.extend(self.image.named().map(|(n, t)| (format!("image_encoder.{n}"), t)));
        out.extend(self.question.named().map(|(n, t)| (format!("question_encoder.{n}"), t)));
        out.extend(self.caption.named().map(|(n, t)| (format!("caption_encoder.{n}"), t)));
        let rest: [(&str, &Tensor); 15] = [
            ("prior.w_mean", &self.prior_w_mean),
            ("prior.b_mean", &self.prior_b_mean),
            ("prior.w_logvar", &self.prior_w_logvar),
            ("prior.b_logvar", &self.prior_b_logvar),
            ("posterior.w_mean", &self.post_w_mean),
            ("posterior.b_mean", &self.post_b_mean),
            ("posterior.w_logvar", &self.post_w_logvar),
            ("posterior.b_logvar", &self.post_b_logvar),
            ("category.w", &self.category_w),
            ("category.b", &self.category_b),
            ("answer.w_joint", &self.answer_w_joint),
            ("answer.w_latent", &self.answer_w_latent),
            ("answer.b_hidden", &self.answer_b_hidden),
            ("answer.w_out", &self.answer_w_out),
            ("answer.b_out", &self.answer_b_out),
        ];
        out.extend(rest.into_iter().map(|(n, t)| (n.to_string(), t)));
        out
    }

    fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let Self {
            image,
            question,
            caption,
            prior_w_mean,
            prior_b_mean,
            prior_w_logvar,
            prior_b_logvar,
            post_w_mean,
            post_b_mean,
            post_w_logvar,
            post_b_logvar,
            category_w,
            category_b,
            answer_w_joint,
            answer_w_latent,
            answer_b_hidden,
            answer_w_out,
            answer_b_out,
        } = self;
        let mut out: Vec<(String, &mut Tensor)> = Vec::with_capacity(25);
        out.extend(image.named_mut().map(|(n, t)| (format!("image_encoder.{n}"), t)));
        out.extend(question.named_mut().map(|(n, t)| (format!("question_encoder.{n}"), t)));
        out.extend(caption.named_mut().map(|(n, t)| (format!("caption_encoder.{n}"), t)));
        let rest: [(&str, &mut Tensor); 15] = [
            ("prior.w_mean", prior_w_mean),
            ("prior.b_mean", prior_b_mean),
            ("prior.w_logvar", prior_w_logvar),
            ("prior.b_logvar", prior_b_logvar),
            ("posterior.w_mean", post_w_mean),
            ("posterior.b_mean", post_b_mean),
            ("posterior.w_logvar", post_w_logvar),
            ("posterior.b_logvar", post_b_logvar),
            ("category.w", category_w),
            ("category.b", category_b),
            ("answer.w_joint", answer_w_joint),
            ("answer.w_latent", answer_w_latent),
            ("answer.b_hidden", answer_b_hidden),
            ("answer.w_out", answer_w_out),
            ("answer.b_out", answer_b_out),
        ];
        out.extend(rest.into_iter().map(|(n, t)| (n.to_string(), t)));
        out
    }
}
