//! The latent-variable VQA model.
//!
//! Two latents sit on top of the fused image-question vector `j`:
//!
//! - a Gaussian caption latent `z` with a conditional prior `p(z | v, q)`
//!   and a caption posterior `q(z | c)`; training samples `z` from the
//!   posterior and pays `KL(q ‖ p)`, prediction samples it from the prior;
//! - a discrete answer category `d` with classifier `p(d | v, q)`. It is
//!   observed in training and summed out exactly at prediction time.
//!
//! Gradients are computed by a hand-written backward pass in [`model`] and
//! checked against central differences in the test suite.

mod category;
mod config;
mod heads;
mod model;
mod params;

pub use crate::numcore::GaussianParams;
pub use category::{CategoryTable, OTHER_CATEGORY, OTHER_PLACEHOLDER};
pub use config::{CombineMode, ModelConfig, PosteriorConditioning};
pub use heads::{answer_logits, category_distribution, combine, conditional_answer_dist, posterior_net, prior_net};
pub use model::{
    batch_loss_and_grad, example_loss, predict_from, EncodedExample, LossBreakdown, LvVqaModel, Prediction,
};
pub use params::LvVqaParams;
