use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Checkpoint;
use crate::error::{Error, Result};
use crate::latentvqa::{predict_from, CombineMode, LvVqaModel};
use crate::numcore::{kl_diag_gaussian, splitmix64, RngStream};
use crate::synthdata::VqaRecord;

const EVAL_STREAM: u64 = 0x6576_616c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Accuracy per gold category name of the records.
    pub per_category: BTreeMap<String, f64>,
    /// Records per gold category name.
    pub per_category_count: BTreeMap<String, usize>,
    /// Mean `KL(q(z | c) ‖ p(z | v, q))`; 0 when the caption latent is off.
    pub mean_kl: f64,
    pub category_accuracy: f64,
    pub n_records: usize,
    /// Records whose gold answer is not in the model's answer table.
    pub n_unseen_answers: usize,
}

/// Prediction source for `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LatentSource {
    Prior,
    Caption,
}

/// Accuracy of `predict` on `records` with `k` samples of `z` from the prior.
/// Records whose answer is not in the model's table are scored as wrong.
pub fn evaluate(
    checkpoint: &Checkpoint,
    records: &[VqaRecord],
    k: usize,
    combine_override: Option<CombineMode>,
) -> Result<EvalReport> {
    let report = evaluate_model(
        &checkpoint.model,
        checkpoint.train_config.seed,
        records,
        k,
        combine_override,
        LatentSource::Prior,
    )?;
    warn_unseen(&report);
    Ok(report)
}

pub(crate) fn warn_unseen(report: &EvalReport) {
    if report.n_unseen_answers > 0 {
        log::warn!(
            "{} record(s) have answers unseen in training; scored as wrong",
            report.n_unseen_answers
        );
    }
}

/// As [`evaluate`], with `z` drawn from the caption posterior `q(z | c)`.
pub fn evaluate_with_gt_captions(
    checkpoint: &Checkpoint,
    records: &[VqaRecord],
    k: usize,
    combine_override: Option<CombineMode>,
) -> Result<EvalReport> {
    if let Some(r) = records.iter().find(|r| r.caption.trim().is_empty()) {
        return Err(Error::data(format!("record {}: missing caption", r.id)));
    }
    let report = evaluate_model(
        &checkpoint.model,
        checkpoint.train_config.seed,
        records,
        k,
        combine_override,
        LatentSource::Caption,
    )?;
    warn_unseen(&report);
    Ok(report)
}

pub(crate) fn evaluate_model(
    model: &LvVqaModel,
    seed: u64,
    records: &[VqaRecord],
    k: usize,
    combine_override: Option<CombineMode>,
    source: LatentSource,
) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::domain("evaluation needs at least one record"));
    }
    let mut config = model.config.clone();
    config.k_eval = k;
    if let Some(mode) = combine_override {
        config.combine_mode = mode;
    }
    config.validate()?;

    let eval_seed = splitmix64(seed ^ EVAL_STREAM);
    let mut correct = 0usize;
    let mut cat_correct = 0usize;
    let mut kl_sum = 0.0;
    let mut kl_n = 0usize;
    let mut unseen = 0usize;
    let mut by_cat: BTreeMap<String, (usize, usize)> = BTreeMap::new();

    for (i, record) in records.iter().enumerate() {
        model.check_features(record)?;
        let q_ids = model.vocab.encode(&record.question);
        let j = model.joint(&record.image_features, &q_ids)?;
        let posterior = if config.use_caption_latent {
            Some(model.posterior(&j, &model.vocab.encode(&record.caption))?)
        } else {
            None
        };
        let latent = match source {
            LatentSource::Prior => None,
            LatentSource::Caption => posterior.as_ref(),
        };
        let mut rng = RngStream::child(eval_seed, i as u64);
        let pred = predict_from(&model.params, &config, &model.table, &j, latent, &mut rng)?;

        let gold = model.table.answer_index(&record.answer);
        let hit = gold.is_some_and(|g| argmax(&pred.probs) == g);
        if gold.is_none() {
            unseen += 1;
        }
        if hit {
            correct += 1;
        }
        if model.table.category_index(&record.category) == Some(argmax(&pred.cat_probs)) {
            cat_correct += 1;
        }
        let entry = by_cat.entry(record.category.clone()).or_default();
        entry.0 += usize::from(hit);
        entry.1 += 1;

        if let (Some(q), false) = (&posterior, record.caption.trim().is_empty()) {
            kl_n += 1;
            let p = crate::latentvqa::prior_net(&model.params, &j);
            kl_sum += kl_diag_gaussian(&q.mu, &q.logvar, &p.mu, &p.logvar)?;
        }
    }

    let n = records.len() as f64;
    Ok(EvalReport {
        accuracy: correct as f64 / n,
        per_category: by_cat
            .iter()
            .map(|(c, &(h, m))| (c.clone(), h as f64 / m as f64))
            .collect(),
        per_category_count: by_cat.iter().map(|(c, &(_, m))| (c.clone(), m)).collect(),
        mean_kl: if kl_n == 0 { 0.0 } else { kl_sum / kl_n as f64 },
        category_accuracy: cat_correct as f64 / n,
        n_records: records.len(),
        n_unseen_answers: unseen,
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Multi-annotator accuracy `min(matches / 3, 1)`. With a single gold
/// answer this is 1 on a match and 0 otherwise.
pub fn consensus_accuracy(predicted: &str, gold_answers: &[&str]) -> Result<f64> {
    match gold_answers {
        [] => Err(Error::domain("consensus_accuracy needs at least one gold answer")),
        [only] => Ok(if *only == predicted { 1.0 } else { 0.0 }),
        golds => {
            let matches = golds.iter().filter(|g| **g == predicted).count();
            Ok((matches as f64 / 3.0).min(1.0))
        }
    }
}
