mod common;

use common::checks::*;
use lvvqa::latentvqa::{
    answer_logits, combine, conditional_answer_dist, example_loss, predict_from, CombineMode, PosteriorConditioning,
};
use lvvqa::numcore::{softmax, RngStream, Tensor};
use lvvqa::Error;
use proptest::prelude::*;

#[test]
fn mixture_equals_brute_force_marginal() {
    assert!(mixture_vs_brute_force_max_error(100) < 1e-12);
}

#[test]
fn one_hot_category_makes_modes_coincide() {
    for i in 0..100 {
        let mut rng = RngStream::new(5000 + i);
        let table = random_table(&mut rng);
        let logits: Vec<f64> = (0..table.n_answers()).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
        let d = rng.below(table.n_categories());
        let mut one_hot = vec![0.0; table.n_categories()];
        one_hot[d] = 1.0;
        let m = combine(&logits, &one_hot, &table, CombineMode::Mixture).unwrap();
        let p = combine(&logits, &one_hot, &table, CombineMode::Product).unwrap();
        let c = conditional_answer_dist(&logits, &table, d).unwrap();
        for ((a, b), e) in m.iter().zip(&p).zip(&c) {
            assert!((a - b).abs() < 1e-12 && (a - e).abs() < 1e-12);
        }
    }
}

#[test]
fn predict_is_a_distribution_for_every_configuration() {
    for (caption, category) in common::flag_combinations() {
        for mode in [CombineMode::Mixture, CombineMode::Product] {
            let (model, records) = small_model(caption, category, mode, 3);
            for (i, r) in records.iter().enumerate() {
                let p = model
                    .predict(
                        &r.image_features,
                        &model.vocab.encode(&r.question),
                        &mut RngStream::new(i as u64),
                    )
                    .unwrap();
                assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(p.probs.iter().all(|&x| x >= 0.0));
                assert!((p.cat_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mixture_marginal_sums_to_one() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 4);
    for r in &records {
        let j = model
            .joint(&r.image_features, &model.vocab.encode(&r.question))
            .unwrap();
        let logits = answer_logits(&model.params, &j, &vec![0.3; model.config.d_z]);
        let cat_probs = lvvqa::latentvqa::category_distribution(&model.params, &j);
        let p = combine(&logits, &cat_probs, &model.table, CombineMode::Mixture).unwrap();
        assert!((p.iter().sum::<f64>() - cat_probs.iter().sum::<f64>()).abs() < 1e-12);
    }
}

#[test]
fn both_latents_off_reduces_to_softmax_baseline() {
    assert_eq!(baseline_reduction_errors(), (0.0, 0.0));
}

#[test]
fn zero_latent_weights_make_predictions_seed_independent() {
    assert!(zero_wz_seed_dependence() <= 1e-15);
}

#[test]
fn loss_decomposes_and_beta_zero_drops_kl() {
    for (caption, category) in common::flag_combinations() {
        let (model, records) = small_model(caption, category, CombineMode::Mixture, 7);
        for (i, r) in records.iter().enumerate() {
            for beta in [0.0, 0.25, 1.0] {
                let l = model.training_loss(r, &mut RngStream::new(i as u64), beta).unwrap();
                assert_eq!(l.loss, l.nll_answer + l.nll_category + beta * l.kl);
                assert!(l.kl >= -1e-12 && l.kl.is_finite());
                if !caption {
                    assert_eq!(l.kl, 0.0);
                }
                if !category {
                    assert_eq!(l.nll_category, 0.0);
                }
            }
        }
    }
}

/// With the image pathway saturated to all-ones, the caption encoder copied
/// from the question encoder and the caption equal to the question, the
/// posterior sees exactly `j`; identical head weights then give `kl = 0`.
#[test]
fn identical_prior_and_posterior_give_zero_kl() {
    let (mut model, records) = small_model(true, true, CombineMode::Mixture, 8);
    let p = &mut model.params;
    p.image.w_img.fill(0.0);
    p.image.b_img.fill(20.0);
    p.caption = p.question.clone();
    p.post_w_mean = p.prior_w_mean.clone();
    p.post_b_mean = p.prior_b_mean.clone();
    p.post_w_logvar = p.prior_w_logvar.clone();
    p.post_b_logvar = p.prior_b_logvar.clone();
    for r in &records {
        let mut rec = r.clone();
        rec.caption = rec.question.clone();
        let l = model.training_loss(&rec, &mut RngStream::new(0), 1.0).unwrap();
        assert!(l.kl.abs() < 1e-12, "{}", l.kl);
    }
}

#[test]
fn monte_carlo_variance_decays_as_one_over_k() {
    let slope = monte_carlo_slope();
    assert!((slope + 1.0).abs() <= 0.15, "slope {slope}");
}

#[test]
fn near_deterministic_prior_makes_k_irrelevant() {
    assert!(near_deterministic_gap() < 1e-3);
}

#[test]
fn predict_rejects_zero_samples() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 11);
    let mut config = model.config.clone();
    config.k_eval = 0;
    let j = model
        .joint(&records[0].image_features, &model.vocab.encode(&records[0].question))
        .unwrap();
    let err = predict_from(&model.params, &config, &model.table, &j, None, &mut RngStream::new(0));
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn predict_is_deterministic_given_seed() {
    let (model, records) = small_model(true, true, CombineMode::Product, 12);
    let r = &records[0];
    let ids = model.vocab.encode(&r.question);
    let a = model.predict(&r.image_features, &ids, &mut RngStream::new(3)).unwrap();
    let b = model.predict(&r.image_features, &ids, &mut RngStream::new(3)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_answer_names_record() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 13);
    let mut r = records[0].clone();
    r.answer = "purple".into();
    let err = model.training_loss(&r, &mut RngStream::new(0), 1.0).unwrap_err();
    assert!(matches!(&err, Error::Data(m) if m.contains(&r.id) && m.contains("purple")));
    let mut r = records[0].clone();
    r.category = "weather".into();
    assert!(matches!(model.training_loss(&r, &mut RngStream::new(0), 1.0), Err(Error::Data(m)) if m.contains(&r.id)));
}

#[test]
fn wrong_feature_length_is_config_error() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 14);
    let mut r = records[0].clone();
    r.image_features.pop();
    assert!(matches!(
        model.training_loss(&r, &mut RngStream::new(0), 1.0),
        Err(Error::Config(_))
    ));
}

#[test]
fn caption_only_posterior_ignores_image_and_question() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 15);
    let caption = model.vocab.encode(&records[0].caption);
    let j1 = model
        .joint(&records[0].image_features, &model.vocab.encode(&records[0].question))
        .unwrap();
    let j2 = model
        .joint(&records[1].image_features, &model.vocab.encode(&records[1].question))
        .unwrap();
    assert_eq!(
        model.posterior(&j1, &caption).unwrap(),
        model.posterior(&j2, &caption).unwrap()
    );

    let mut ciq = model.clone();
    ciq.config.posterior_conditioning = PosteriorConditioning::CaptionImageQuestion;
    assert_ne!(
        ciq.posterior(&j1, &caption).unwrap(),
        ciq.posterior(&j2, &caption).unwrap()
    );
}

#[test]
fn example_loss_validates_noise_length() {
    let (model, records) = small_model(true, true, CombineMode::Mixture, 16);
    let ex = model.encode(&records[0]).unwrap();
    let err = example_loss(&model.params, &model.config, &model.table, &ex, &[0.0], 1.0, None);
    assert!(matches!(err, Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combine_outputs_are_distributions(seed in any::<u64>(), product in any::<bool>()) {
        let mut rng = RngStream::new(seed);
        let table = random_table(&mut rng);
        let logits: Vec<f64> = (0..table.n_answers()).map(|_| rng.uniform_range(-20.0, 20.0)).collect();
        let cat_probs = random_probs(&mut rng, table.n_categories());
        let mode = if product { CombineMode::Product } else { CombineMode::Mixture };
        let p = combine(&logits, &cat_probs, &table, mode).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn product_mode_oracle(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let table = random_table(&mut rng);
        let logits: Vec<f64> = (0..table.n_answers()).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
        let cat_probs = random_probs(&mut rng, table.n_categories());
        let s = softmax(&logits).unwrap();
        let raw: Vec<f64> = (0..logits.len()).map(|a| s[a] * cat_probs[table.category_of(a)]).collect();
        let total: f64 = raw.iter().sum();
        let got = combine(&logits, &cat_probs, &table, CombineMode::Product).unwrap();
        for (g, r) in got.iter().zip(&raw) {
            prop_assert!((g - r / total).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_matches_table(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let table = random_table(&mut rng);
        let m: Tensor = table.mask();
        for a in 0..table.n_answers() {
            let row = m.row(a);
            prop_assert_eq!(row.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(row[table.category_of(a)], 1.0);
        }
    }
}
