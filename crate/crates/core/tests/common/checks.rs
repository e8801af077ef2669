//! Property checks shared by the unit-level tests and the acceptance run.

use lvvqa::latentvqa::{answer_logits, combine, predict_from, CategoryTable, CombineMode, LvVqaModel, ModelConfig};
use lvvqa::numcore::{log_sum_exp, softmax, RngStream};
use lvvqa::synthdata::VqaRecord;

pub fn random_table(rng: &mut RngStream) -> CategoryTable {
    let n_cat = 1 + rng.below(5);
    let mut answers = Vec::new();
    let mut answer_category = Vec::new();
    for d in 0..n_cat {
        for _ in 0..1 + rng.below(4) {
            answers.push(format!("a{}", answers.len()));
            answer_category.push(d);
        }
    }
    let mut categories: Vec<String> = (0..n_cat - 1).map(|d| format!("c{d}")).collect();
    categories.push("other".into());
    CategoryTable::new(answers, categories, answer_category).unwrap()
}

pub fn random_probs(rng: &mut RngStream, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// `Σ_d p(d) · exp(l_a) / Σ_{b ∈ d} exp(l_b)`, written as a plain loop.
pub fn brute_force_mixture(logits: &[f64], cat_probs: &[f64], table: &CategoryTable) -> Vec<f64> {
    let mut out = vec![0.0; logits.len()];
    for (d, &pd) in cat_probs.iter().enumerate() {
        let mut z = 0.0;
        for a in 0..logits.len() {
            if table.category_of(a) == d {
                z += logits[a].exp();
            }
        }
        for a in 0..logits.len() {
            if table.category_of(a) == d {
                out[a] += pd * logits[a].exp() / z;
            }
        }
    }
    out
}

pub fn mixture_vs_brute_force_max_error(instances: u64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut rng = RngStream::new(1000 + i);
        let table = random_table(&mut rng);
        let logits: Vec<f64> = (0..table.n_answers()).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
        let cat_probs = random_probs(&mut rng, table.n_categories());
        let got = combine(&logits, &cat_probs, &table, CombineMode::Mixture).unwrap();
        let want = brute_force_mixture(&logits, &cat_probs, &table);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    worst
}

pub fn small_model(caption: bool, category: bool, mode: CombineMode, seed: u64) -> (LvVqaModel, Vec<VqaRecord>) {
    let records = super::records(24, seed);
    let config = ModelConfig {
        use_caption_latent: caption,
        use_category_latent: category,
        combine_mode: mode,
        ..ModelConfig::tiny(6)
    };
    (super::model_for(&records, config, seed), records)
}

/// Largest deviation from the plain softmax baseline with both latents off:
/// `(training loss vs cross-entropy, predict vs softmax)`.
pub fn baseline_reduction_errors() -> (f64, f64) {
    let (model, records) = small_model(false, false, CombineMode::Mixture, 5);
    let mut loss_err = 0.0f64;
    let mut pred_err = 0.0f64;
    for (i, r) in records.iter().enumerate() {
        let ids = model.vocab.encode(&r.question);
        let j = model.joint(&r.image_features, &ids).unwrap();
        let logits = answer_logits(&model.params, &j, &vec![0.0; model.config.d_z]);
        let gold = model.table.answer_index(&r.answer).unwrap();
        let ce = log_sum_exp(&logits).unwrap() - logits[gold];
        let l = model.training_loss(r, &mut RngStream::new(i as u64), 0.8).unwrap();
        loss_err = loss_err.max((l.loss - ce).abs());
        let p = model
            .predict(&r.image_features, &ids, &mut RngStream::new(i as u64))
            .unwrap();
        for (a, b) in p.probs.iter().zip(softmax(&logits).unwrap()) {
            pred_err = pred_err.max((a - b).abs());
        }
    }
    (loss_err, pred_err)
}

/// Largest difference between predictions under two rng seeds with `W_z = 0`.
pub fn zero_wz_seed_dependence() -> f64 {
    let mut worst = 0.0f64;
    for mode in [CombineMode::Mixture, CombineMode::Product] {
        let (mut model, records) = small_model(true, true, mode, 6);
        model.params.answer_w_latent.fill(0.0);
        for r in &records {
            let ids = model.vocab.encode(&r.question);
            let a = model.predict(&r.image_features, &ids, &mut RngStream::new(1)).unwrap();
            let b = model.predict(&r.image_features, &ids, &mut RngStream::new(2)).unwrap();
            for (x, y) in a.probs.iter().zip(&b.probs) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    worst
}

/// Variance across `runs` reseeded predictions of the probability of
/// `answer`, for `k` samples per prediction.
pub fn top_probability_variance(model: &LvVqaModel, j: &[f64], answer: usize, k: usize, runs: u64) -> f64 {
    let mut config = model.config.clone();
    config.k_eval = k;
    let xs: Vec<f64> = (0..runs)
        .map(|s| {
            predict_from(&model.params, &config, &model.table, j, None, &mut RngStream::new(s))
                .unwrap()
                .probs[answer]
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Least-squares slope of `ln var` against `ln K` for K in {1, 4, 16, 64, 256}.
///
/// The category latent is off: in mixture mode an answer that is alone in
/// its category has probability `p(d)` exactly, whatever `z` is.
pub fn monte_carlo_slope() -> f64 {
    let (model, records) = small_model(true, false, CombineMode::Mixture, 9);
    let r = &records[0];
    let j = model
        .joint(&r.image_features, &model.vocab.encode(&r.question))
        .unwrap();
    let mut config = model.config.clone();
    config.k_eval = 4096;
    let reference = predict_from(&model.params, &config, &model.table, &j, None, &mut RngStream::new(999)).unwrap();
    let top = lvvqa::harness::argmax(&reference.probs);
    let ks = [1usize, 4, 16, 64, 256];
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .map(|&k| ((k as f64).ln(), top_probability_variance(&model, &j, top, k, 200).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Max difference between K = 1 and K = 64 predictions with prior
/// logvar forced to -10.
pub fn near_deterministic_gap() -> f64 {
    let (mut model, records) = small_model(true, true, CombineMode::Mixture, 10);
    model.params.prior_w_logvar.fill(0.0);
    model.params.prior_b_logvar.fill(-10.0);
    let mut worst = 0.0f64;
    for (i, r) in records.iter().enumerate() {
        let j = model
            .joint(&r.image_features, &model.vocab.encode(&r.question))
            .unwrap();
        let mut c1 = model.config.clone();
        c1.k_eval = 1;
        let mut c64 = model.config.clone();
        c64.k_eval = 64;
        let a = predict_from(
            &model.params,
            &c1,
            &model.table,
            &j,
            None,
            &mut RngStream::new(i as u64),
        )
        .unwrap();
        let b = predict_from(
            &model.params,
            &c64,
            &model.table,
            &j,
            None,
            &mut RngStream::new(i as u64 + 100),
        )
        .unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}
