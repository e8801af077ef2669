use serde::Serialize;

use super::heads::{answer_forward, category_logits, posterior_input};
use super::{
    category_distribution, combine, prior_net, CategoryTable, LvVqaParams, ModelConfig, PosteriorConditioning,
};
use crate::encoders::{encode_image, fuse, Vocabulary};
use crate::error::{Error, Result};
use crate::numcore::gaussian::{clamp_logvar, kl_terms};
use crate::numcore::softmax::{log_sum_exp_unchecked, softmax_unchecked};
use crate::numcore::{reparam_sample, reparam_with_noise, GaussianParams, RngStream, LOGVAR_MAX, LOGVAR_MIN};
use crate::synthdata::VqaRecord;

/// Model configuration, answer/category table, vocabulary and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LvVqaModel {
    pub config: ModelConfig,
    pub table: CategoryTable,
    pub vocab: Vocabulary,
    pub params: LvVqaParams,
}

/// A record mapped to ids and indices for the model.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExample {
    pub id: String,
    pub image: Vec<f64>,
    pub question: Vec<usize>,
    pub caption: Vec<usize>,
    pub answer: usize,
    pub category: usize,
}

/// `loss = nll_answer + nll_category + beta * kl`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub loss: f64,
    pub nll_answer: f64,
    pub nll_category: f64,
    pub kl: f64,
}

/// Output of one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `p(a | v, q)` averaged over the Monte-Carlo samples of `z`.
    pub probs: Vec<f64>,
    /// `p(d | v, q)`; it does not depend on `z`.
    pub cat_probs: Vec<f64>,
    /// The distribution `z` was drawn from (prior, or posterior for the caption probe).
    pub latent: GaussianParams,
}

impl LvVqaModel {
    pub fn new(config: ModelConfig, table: CategoryTable, vocab: Vocabulary, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = LvVqaParams::init(&config, vocab.len(), table.n_answers(), table.n_categories(), seed);
        Ok(Self {
            config,
            table,
            vocab,
            params,
        })
    }

    /// Maps a record onto the model's vocabulary and table. The answer and
    /// category must both be known.
    pub fn encode(&self, record: &VqaRecord) -> Result<EncodedExample> {
        let answer = self
            .table
            .answer_index(&record.answer)
            .ok_or_else(|| Error::data(format!("record {}: unknown answer {:?}", record.id, record.answer)))?;
        let category = self
            .table
            .category_index(&record.category)
            .ok_or_else(|| Error::data(format!("record {}: unknown category {:?}", record.id, record.category)))?;
        if self.table.category_of(answer) != category {
            return Err(Error::data(format!(
                "record {}: answer {:?} belongs to category {:?}, not {:?}",
                record.id,
                record.answer,
                self.table.categories()[self.table.category_of(answer)],
                record.category
            )));
        }
        self.check_features(record)?;
        Ok(EncodedExample {
            id: record.id.clone(),
            image: record.image_features.clone(),
            question: self.vocab.encode(&record.question),
            caption: self.vocab.encode(&record.caption),
            answer,
            category,
        })
    }

    pub(crate) fn check_features(&self, record: &VqaRecord) -> Result<()> {
        if record.image_features.len() != self.config.d_v {
            return Err(Error::config(format!(
                "record {}: {} image features, model expects {}",
                record.id,
                record.image_features.len(),
                self.config.d_v
            )));
        }
        Ok(())
    }

    /// Loss of one record with a single posterior sample drawn from `rng`.
    pub fn training_loss(&self, record: &VqaRecord, rng: &mut RngStream, beta: f64) -> Result<LossBreakdown> {
        let ex = self.encode(record)?;
        let eps = rng.normal_vec(self.config.d_z);
        example_loss(&self.params, &self.config, &self.table, &ex, &eps, beta, None)
    }

    /// Test-time prediction from image and question only, `z ~ p(z | v, q)`.
    pub fn predict(&self, v_raw: &[f64], question_ids: &[usize], rng: &mut RngStream) -> Result<Prediction> {
        let j = self.joint(v_raw, question_ids)?;
        predict_from(&self.params, &self.config, &self.table, &j, None, rng)
    }

    /// Prediction with `z ~ q(z | c)` from the ground-truth caption.
    pub fn predict_with_caption(
        &self,
        v_raw: &[f64],
        question_ids: &[usize],
        caption_ids: &[usize],
        rng: &mut RngStream,
    ) -> Result<Prediction> {
        let j = self.joint(v_raw, question_ids)?;
        let posterior = self.posterior(&j, caption_ids)?;
        predict_from(&self.params, &self.config, &self.table, &j, Some(&posterior), rng)
    }

    pub fn joint(&self, v_raw: &[f64], question_ids: &[usize]) -> Result<Vec<f64>> {
        let h_v = encode_image(&self.params.image, v_raw)?;
        let h_q = self.params.question.forward(question_ids)?.output();
        fuse(&h_v, &h_q)
    }

    pub fn posterior(&self, j: &[f64], caption_ids: &[usize]) -> Result<GaussianParams> {
        let h_c = self.params.caption.forward(caption_ids)?.output();
        super::posterior_net(&self.params, &h_c, j, self.config.posterior_conditioning)
    }
}

/// Averages `combine(answer_logits(j, z_k), p(d | v, q))` over `k_eval`
/// samples `z_k` from `latent` (the prior of `j` when `None`).
///
/// Without the caption latent `z` is the zero vector and no noise is drawn;
/// without the category latent the answer distribution is the plain softmax.
pub fn predict_from(
    params: &LvVqaParams,
    config: &ModelConfig,
    table: &CategoryTable,
    j: &[f64],
    latent: Option<&GaussianParams>,
    rng: &mut RngStream,
) -> Result<Prediction> {
    if config.k_eval < 1 {
        return Err(Error::config("k_eval must be at least 1"));
    }
    let cat_probs = category_distribution(params, j);
    let latent = match latent {
        Some(g) => g.clone(),
        None => prior_net(params, j),
    };
    let answer_dist = |z: &[f64]| -> Result<Vec<f64>> {
        let (_, logits) = answer_forward(params, j, z);
        if config.use_category_latent {
            combine(&logits, &cat_probs, table, config.combine_mode)
        } else {
            Ok(softmax_unchecked(&logits))
        }
    };

    let probs = if config.use_caption_latent {
        let mut acc = vec![0.0; table.n_answers()];
        for _ in 0..config.k_eval {
            let z = reparam_sample(&latent, rng);
            for (a, p) in acc.iter_mut().zip(answer_dist(&z)?) {
                *a += p;
            }
        }
        let k = config.k_eval as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    } else {
        answer_dist(&vec![0.0; config.d_z])?
    };
    Ok(Prediction {
        probs,
        cat_probs,
        latent,
    })
}

/// Loss of one encoded example for fixed posterior noise `eps`. When
/// `grads` is given, `∂loss/∂θ` is accumulated into it.
///
/// - caption latent on: `z = mu_q + exp(logvar_q / 2) ⊙ eps` with
///   `(mu_q, logvar_q)` from the caption posterior, plus `beta · KL(q ‖ p)`;
///   off: `z = 0`, `kl = 0`.
/// - category latent on: answer NLL under the softmax restricted to the
///   gold category, plus the category cross-entropy; off: full-vocabulary
///   softmax NLL, `nll_category = 0`.
pub fn example_loss(
    params: &LvVqaParams,
    config: &ModelConfig,
    table: &CategoryTable,
    ex: &EncodedExample,
    eps: &[f64],
    beta: f64,
    grads: Option<&mut LvVqaParams>,
) -> Result<LossBreakdown> {
    if !beta.is_finite() {
        return Err(Error::config(format!("KL weight must be finite, got {beta}")));
    }
    if ex.answer >= table.n_answers() || ex.category >= table.n_categories() {
        return Err(Error::data(format!(
            "record {}: answer or category index out of range",
            ex.id
        )));
    }
    if eps.len() != config.d_z {
        return Err(Error::domain(format!(
            "noise has {} dims, d_z is {}",
            eps.len(),
            config.d_z
        )));
    }
    let h_v = encode_image(&params.image, &ex.image)?;
    let q_trace = params.question.forward(&ex.question)?;
    let h_q = q_trace.output();
    let j = fuse(&h_v, &h_q)?;

    let latent = if config.use_caption_latent {
        Some(LatentPass::forward(params, config, &j, &ex.caption, eps)?)
    } else {
        None
    };
    let z = latent.as_ref().map_or_else(|| vec![0.0; config.d_z], |l| l.z.clone());
    let kl = latent.as_ref().map_or(0.0, |l| l.kl);

    let (u, logits) = answer_forward(params, &j, &z);
    let support: Vec<usize> = if config.use_category_latent {
        table.members(ex.category).to_vec()
    } else {
        (0..table.n_answers()).collect()
    };
    let lse = log_sum_exp_unchecked(support.iter().map(|&a| logits[a]));
    let nll_answer = lse - logits[ex.answer];

    let cat = if config.use_category_latent {
        let cl = category_logits(params, &j);
        let lse_c = log_sum_exp_unchecked(cl.iter().copied());
        Some((lse_c - cl[ex.category], cl, lse_c))
    } else {
        None
    };
    let nll_category = cat.as_ref().map_or(0.0, |c| c.0);
    let loss = nll_answer + nll_category + beta * kl;

    if let Some(g) = grads {
        // answer head
        let mut d_logits = vec![0.0; logits.len()];
        for &a in &support {
            d_logits[a] = (logits[a] - lse).exp();
        }
        d_logits[ex.answer] -= 1.0;
        g.answer_w_out.add_outer(&d_logits, &u);
        g.answer_b_out.add_slice(&d_logits);
        let du = params.answer_w_out.matvec_t(&d_logits);
        let da: Vec<f64> = du.iter().zip(&u).map(|(d, u)| d * (1.0 - u * u)).collect();
        g.answer_w_joint.add_outer(&da, &j);
        g.answer_b_hidden.add_slice(&da);
        let mut dj = params.answer_w_joint.matvec_t(&da);

        if let Some((_, cl, lse_c)) = &cat {
            let mut d_cat: Vec<f64> = cl.iter().map(|l| (l - lse_c).exp()).collect();
            d_cat[ex.category] -= 1.0;
            g.category_w.add_outer(&d_cat, &j);
            g.category_b.add_slice(&d_cat);
            add_into(&mut dj, &params.category_w.matvec_t(&d_cat));
        }

        if let Some(lat) = &latent {
            g.answer_w_latent.add_outer(&da, &lat.z);
            let dz = params.answer_w_latent.matvec_t(&da);
            lat.backward(params, config, &j, &dz, eps, beta, g, &mut dj);
        }

        let dh_v: Vec<f64> = dj.iter().zip(&h_q).map(|(d, h)| d * h).collect();
        let dh_q: Vec<f64> = dj.iter().zip(&h_v).map(|(d, h)| d * h).collect();
        params.image.backward(&ex.image, &h_v, &dh_v, &mut g.image);
        params.question.backward(&q_trace, &dh_q, &mut g.question);
    }

    Ok(LossBreakdown {
        loss,
        nll_answer,
        nll_category,
        kl,
    })
}

/// Mean loss over a batch and, in `grads`, the gradient of that mean.
/// `noise[i]` is the posterior noise for `batch[i]`.
pub fn batch_loss_and_grad(
    params: &LvVqaParams,
    config: &ModelConfig,
    table: &CategoryTable,
    batch: &[&EncodedExample],
    noise: &[Vec<f64>],
    beta: f64,
    grads: &mut LvVqaParams,
) -> Result<LossBreakdown> {
    if batch.is_empty() || batch.len() != noise.len() {
        return Err(Error::domain(
            "batch must be non-empty with one noise vector per example",
        ));
    }
    let mut total = LossBreakdown::default();
    for (ex, eps) in batch.iter().zip(noise) {
        let l = example_loss(params, config, table, ex, eps, beta, Some(grads))?;
        total.loss += l.loss;
        total.nll_answer += l.nll_answer;
        total.nll_category += l.nll_category;
        total.kl += l.kl;
    }
    let n = batch.len() as f64;
    grads.scale(1.0 / n);
    Ok(LossBreakdown {
        loss: total.loss / n,
        nll_answer: total.nll_answer / n,
        nll_category: total.nll_category / n,
        kl: total.kl / n,
    })
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

fn clamp_pass(raw: f64) -> bool {
    (LOGVAR_MIN..=LOGVAR_MAX).contains(&raw)
}

/// Forward state of the caption latent, kept for the backward pass.
struct LatentPass {
    caption_trace: crate::encoders::TextTrace,
    h_c: Vec<f64>,
    post_input: Vec<f64>,
    mu_p: Vec<f64>,
    raw_lv_p: Vec<f64>,
    mu_q: Vec<f64>,
    raw_lv_q: Vec<f64>,
    z: Vec<f64>,
    kl: f64,
}

impl LatentPass {
    fn forward(params: &LvVqaParams, config: &ModelConfig, j: &[f64], caption: &[usize], eps: &[f64]) -> Result<Self> {
        let mu_p = params.prior_w_mean.affine(j, &params.prior_b_mean);
        let raw_lv_p = params.prior_w_logvar.affine(j, &params.prior_b_logvar);
        let caption_trace = params.caption.forward(caption)?;
        let h_c = caption_trace.output();
        let post_input = posterior_input(&h_c, j, config.posterior_conditioning);
        let mu_q = params.post_w_mean.affine(&post_input, &params.post_b_mean);
        let raw_lv_q = params.post_w_logvar.affine(&post_input, &params.post_b_logvar);

        let lv_p: Vec<f64> = raw_lv_p.iter().copied().map(clamp_logvar).collect();
        let lv_q: Vec<f64> = raw_lv_q.iter().copied().map(clamp_logvar).collect();
        let posterior = GaussianParams {
            mu: mu_q.clone(),
            logvar: lv_q.clone(),
        };
        let z = reparam_with_noise(&posterior, eps);
        let kl = kl_terms(&mu_q, &lv_q, &mu_p, &lv_p).sum();
        Ok(Self {
            caption_trace,
            h_c,
            post_input,
            mu_p,
            raw_lv_p,
            mu_q,
            raw_lv_q,
            z,
            kl,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn backward(
        &self,
        params: &LvVqaParams,
        config: &ModelConfig,
        j: &[f64],
        dz: &[f64],
        eps: &[f64],
        beta: f64,
        g: &mut LvVqaParams,
        dj: &mut [f64],
    ) {
        let d_z = self.z.len();
        let mut d_mu_q = vec![0.0; d_z];
        let mut d_raw_q = vec![0.0; d_z];
        let mut d_mu_p = vec![0.0; d_z];
        let mut d_raw_p = vec![0.0; d_z];
        for i in 0..d_z {
            let lv_q = clamp_logvar(self.raw_lv_q[i]);
            let lv_p = clamp_logvar(self.raw_lv_p[i]);
            let inv_var_p = (-lv_p).exp();
            let var_q = lv_q.exp();
            let diff = self.mu_q[i] - self.mu_p[i];

            d_mu_q[i] = beta * diff * inv_var_p + dz[i];
            d_mu_p[i] = -beta * diff * inv_var_p;
            let d_lv_q = beta * 0.5 * (var_q * inv_var_p - 1.0) + dz[i] * eps[i] * 0.5 * (0.5 * lv_q).exp();
            let d_lv_p = beta * 0.5 * (1.0 - (var_q + diff * diff) * inv_var_p);
            if clamp_pass(self.raw_lv_q[i]) {
                d_raw_q[i] = d_lv_q;
            }
            if clamp_pass(self.raw_lv_p[i]) {
                d_raw_p[i] = d_lv_p;
            }
        }

        g.post_w_mean.add_outer(&d_mu_q, &self.post_input);
        g.post_b_mean.add_slice(&d_mu_q);
        g.post_w_logvar.add_outer(&d_raw_q, &self.post_input);
        g.post_b_logvar.add_slice(&d_raw_q);
        let mut d_input = params.post_w_mean.matvec_t(&d_mu_q);
        add_into(&mut d_input, &params.post_w_logvar.matvec_t(&d_raw_q));
        let d_hc = match config.posterior_conditioning {
            PosteriorConditioning::CaptionOnly => d_input,
            PosteriorConditioning::CaptionImageQuestion => {
                for ((dj_i, di), hc) in dj.iter_mut().zip(&d_input).zip(&self.h_c) {
                    *dj_i += di * hc;
                }
                d_input.iter().zip(j).map(|(d, j)| d * j).collect()
            }
        };
        params.caption.backward(&self.caption_trace, &d_hc, &mut g.caption);

        g.prior_w_mean.add_outer(&d_mu_p, j);
        g.prior_b_mean.add_slice(&d_mu_p);
        g.prior_w_logvar.add_outer(&d_raw_p, j);
        g.prior_b_logvar.add_slice(&d_raw_p);
        add_into(dj, &params.prior_w_mean.matvec_t(&d_mu_p));
        add_into(dj, &params.prior_w_logvar.matvec_t(&d_raw_p));
    }
}
