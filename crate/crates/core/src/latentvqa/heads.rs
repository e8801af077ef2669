use super::{CategoryTable, CombineMode, LvVqaParams, PosteriorConditioning};
use crate::error::{Error, Result};
use crate::numcore::softmax::{log_sum_exp_unchecked, softmax_unchecked};
use crate::numcore::GaussianParams;

/// Conditional prior `p(z | v, q)` from the joint vector `j`.
pub fn prior_net(params: &LvVqaParams, j: &[f64]) -> GaussianParams {
    let mu = params.prior_w_mean.affine(j, &params.prior_b_mean);
    let logvar = params.prior_w_logvar.affine(j, &params.prior_b_logvar);
    GaussianParams::new(mu, logvar).expect("prior heads share d_z")
}

/// Input vector of the posterior heads.
pub(crate) fn posterior_input(h_c: &[f64], j: &[f64], mode: PosteriorConditioning) -> Vec<f64> {
    match mode {
        PosteriorConditioning::CaptionOnly => h_c.to_vec(),
        PosteriorConditioning::CaptionImageQuestion => h_c.iter().zip(j).map(|(c, j)| c * j).collect(),
    }
}

/// Caption posterior `q(z | c)`, or `q(z | v, q, c)` fed `h_c ⊙ j`.
pub fn posterior_net(
    params: &LvVqaParams,
    h_c: &[f64],
    j: &[f64],
    mode: PosteriorConditioning,
) -> Result<GaussianParams> {
    if mode == PosteriorConditioning::CaptionImageQuestion && h_c.len() != j.len() {
        return Err(Error::domain("caption encoding and joint vector differ in length"));
    }
    let x = posterior_input(h_c, j, mode);
    let mu = params.post_w_mean.affine(&x, &params.post_b_mean);
    let logvar = params.post_w_logvar.affine(&x, &params.post_b_logvar);
    GaussianParams::new(mu, logvar)
}

pub(crate) fn category_logits(params: &LvVqaParams, j: &[f64]) -> Vec<f64> {
    params.category_w.affine(j, &params.category_b)
}

/// `p(d | v, q) = softmax(W_d j + b_d)`.
pub fn category_distribution(params: &LvVqaParams, j: &[f64]) -> Vec<f64> {
    softmax_unchecked(&category_logits(params, j))
}

/// Hidden layer `u` and answer logits.
pub(crate) fn answer_forward(params: &LvVqaParams, j: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut u = params.answer_w_joint.affine(j, &params.answer_b_hidden);
    for (ui, r) in u.iter_mut().zip(params.answer_w_latent.matvec(z)) {
        *ui = (*ui + r).tanh();
    }
    let logits = params.answer_w_out.affine(&u, &params.answer_b_out);
    (u, logits)
}

/// `W_a · tanh(W_j j + W_z z + b_u) + b_a`.
pub fn answer_logits(params: &LvVqaParams, j: &[f64], z: &[f64]) -> Vec<f64> {
    answer_forward(params, j, z).1
}

/// `p(a | v, q, d)`: softmax over the answers of category `d`, zero elsewhere.
pub fn conditional_answer_dist(logits: &[f64], table: &CategoryTable, d: usize) -> Result<Vec<f64>> {
    check_logits(logits, table)?;
    if d >= table.n_categories() {
        return Err(Error::domain(format!(
            "category index {d} out of range for {} categories",
            table.n_categories()
        )));
    }
    let members = table.members(d);
    let lse = log_sum_exp_unchecked(members.iter().map(|&a| logits[a]));
    let mut out = vec![0.0; logits.len()];
    for &a in members {
        out[a] = (logits[a] - lse).exp();
    }
    Ok(out)
}

/// Merges answer logits with category probabilities into `p(a | v, q)`.
///
/// `Mixture` is the exact marginal `Σ_d p(a | d) p(d)`; `Product`
/// reweights the full softmax by `p(cat(a))` and renormalizes.
pub fn combine(logits: &[f64], cat_probs: &[f64], table: &CategoryTable, mode: CombineMode) -> Result<Vec<f64>> {
    check_logits(logits, table)?;
    if cat_probs.len() != table.n_categories() {
        return Err(Error::domain(format!(
            "{} category probabilities for {} categories",
            cat_probs.len(),
            table.n_categories()
        )));
    }
    let total: f64 = cat_probs.iter().sum();
    if cat_probs.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "category probabilities must form a distribution (sum {total})"
        )));
    }
    let mut out = vec![0.0; logits.len()];
    match mode {
        CombineMode::Mixture => {
            for (d, &pd) in cat_probs.iter().enumerate() {
                let members = table.members(d);
                let lse = log_sum_exp_unchecked(members.iter().map(|&a| logits[a]));
                for &a in members {
                    out[a] = pd * (logits[a] - lse).exp();
                }
            }
        }
        CombineMode::Product => {
            let p = softmax_unchecked(logits);
            for (a, pa) in p.iter().enumerate() {
                out[a] = pa * cat_probs[table.category_of(a)];
            }
            let z: f64 = out.iter().sum();
            if z > 0.0 {
                out.iter_mut().for_each(|x| *x /= z);
            } else {
                // Every answer with softmax mass sits in a zero-probability
                // category; fall back to the exact mixture.
                return combine(logits, cat_probs, table, CombineMode::Mixture);
            }
        }
    }
    Ok(out)
}

fn check_logits(logits: &[f64], table: &CategoryTable) -> Result<()> {
    if logits.len() != table.n_answers() {
        return Err(Error::domain(format!(
            "{} logits for {} answers",
            logits.len(),
            table.n_answers()
        )));
    }
    Ok(())
}
