use serde::Serialize;

use super::eval::{evaluate_model, LatentSource};
use super::{Checkpoint, TrainConfig};
use crate::encoders::Vocabulary;
use crate::error::{Error, Result};
use crate::latentvqa::{batch_loss_and_grad, CombineMode, LossBreakdown, LvVqaModel};
use crate::numcore::{adam_step, splitmix64, AdamConfig, AdamState, ParamAccess, RngStream};
use crate::synthdata::{build_category_table, VqaRecord};

const SHUFFLE_STREAM: u64 = 0x7368_7566;
const NOISE_STREAM: u64 = 0x6e6f_6973;

/// Training statistics of one epoch. Loss terms are means over records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Optimizer steps completed at the end of the epoch.
    pub steps: usize,
    pub loss: f64,
    pub nll_answer: f64,
    pub nll_category: f64,
    pub kl: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    /// Parameters of the epoch with the best validation accuracy.
    pub checkpoint: Checkpoint,
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

/// The best epoch for one combine mode.
#[derive(Debug, Clone)]
pub(crate) struct Selection {
    pub mode: CombineMode,
    pub epoch: usize,
    pub val_accuracy: f64,
    pub model: LvVqaModel,
}

/// Trains with Adam on the annealed loss, validating after every epoch.
///
/// The category table and vocabulary are built from `train_records`.
/// Validation records with unseen answers count as wrong.
pub fn train(config: &TrainConfig, train_records: &[VqaRecord], val_records: &[VqaRecord]) -> Result<TrainOutput> {
    let (log, mut selections) = train_selecting(config, train_records, val_records, &[config.model.combine_mode])?;
    let best = selections.remove(0);
    Ok(TrainOutput {
        checkpoint: Checkpoint::new(config.clone(), best.model),
        best_epoch: best.epoch,
        log,
    })
}

/// One training run with a separate best-epoch selection for each mode in
/// `modes`. The logged validation accuracy is that of `modes[0]`.
pub(crate) fn train_selecting(
    config: &TrainConfig,
    train_records: &[VqaRecord],
    val_records: &[VqaRecord],
    modes: &[CombineMode],
) -> Result<(Vec<EpochLog>, Vec<Selection>)> {
    config.validate()?;
    if train_records.is_empty() {
        return Err(Error::data("training needs at least one record"));
    }
    if val_records.is_empty() {
        return Err(Error::data("training needs at least one validation record"));
    }
    if modes.is_empty() {
        return Err(Error::config("at least one combine mode is required"));
    }

    let table = build_category_table(train_records)?;
    let vocab = Vocabulary::build(
        train_records
            .iter()
            .flat_map(|r| [r.question.as_str(), r.caption.as_str()]),
    );
    let mut model = LvVqaModel::new(config.model.clone(), table, vocab, config.seed)?;
    let examples = train_records
        .iter()
        .map(|r| model.encode(r))
        .collect::<Result<Vec<_>>>()?;

    let adam = AdamConfig::with_lr(config.lr);
    let mut states: Vec<AdamState> = model
        .params
        .named_tensors()
        .into_iter()
        .map(|(_, t)| AdamState::new(t))
        .collect();
    let shuffle_seed = splitmix64(config.seed ^ SHUFFLE_STREAM);
    let noise_seed = splitmix64(config.seed ^ NOISE_STREAM);

    let mut log = Vec::with_capacity(config.epochs);
    let mut selections: Vec<Option<Selection>> = vec![None; modes.len()];
    let mut step = 0usize;
    let mut warned = false;
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 0..config.epochs {
        order.sort_unstable();
        RngStream::child(shuffle_seed, epoch as u64).shuffle(&mut order);
        let mut noise_rng = RngStream::child(noise_seed, epoch as u64);
        let mut sums = LossBreakdown::default();

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| &examples[i]).collect();
            let noise: Vec<Vec<f64>> = chunk.iter().map(|_| noise_rng.normal_vec(config.model.d_z)).collect();
            let mut grads = model.params.zeros_like();
            let l = batch_loss_and_grad(
                &model.params,
                &model.config,
                &model.table,
                &batch,
                &noise,
                config.beta(step),
                &mut grads,
            )?;
            let w = batch.len() as f64;
            sums.loss += l.loss * w;
            sums.nll_answer += l.nll_answer * w;
            sums.nll_category += l.nll_category * w;
            sums.kl += l.kl * w;

            let updates = model.params.named_tensors_mut().into_iter().zip(grads.named_tensors());
            for (((_, param), (_, grad)), state) in updates.zip(states.iter_mut()) {
                adam_step(param, grad, state, &adam)?;
            }
            step += 1;
        }

        let mut val_accuracy = 0.0;
        for (slot, &mode) in selections.iter_mut().zip(modes) {
            let report = evaluate_model(
                &model,
                config.seed,
                val_records,
                config.eval_k,
                Some(mode),
                LatentSource::Prior,
            )?;
            if !warned && report.n_unseen_answers > 0 {
                super::eval::warn_unseen(&report);
                warned = true;
            }
            if mode == modes[0] {
                val_accuracy = report.accuracy;
            }
            if slot.as_ref().map_or(true, |s| report.accuracy > s.val_accuracy) {
                *slot = Some(Selection {
                    mode,
                    epoch,
                    val_accuracy: report.accuracy,
                    model: model.clone(),
                });
            }
        }

        let n = examples.len() as f64;
        let entry = EpochLog {
            epoch,
            steps: step,
            loss: sums.loss / n,
            nll_answer: sums.nll_answer / n,
            nll_category: sums.nll_category / n,
            kl: sums.kl / n,
            val_accuracy,
        };
        log::info!(
            "epoch {:>3}  loss {:.4}  nll_a {:.4}  nll_d {:.4}  kl {:.4}  val_acc {:.4}",
            entry.epoch,
            entry.loss,
            entry.nll_answer,
            entry.nll_category,
            entry.kl,
            entry.val_accuracy
        );
        log.push(entry);
    }

    let selections = selections.into_iter().map(|s| s.expect("epochs > 0")).collect();
    Ok((log, selections))
}
