//! Deterministic numerical primitives shared by the model and the harness.

mod adam;
pub(crate) mod gaussian;
mod gradcheck;
mod rng;
pub(crate) mod softmax;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gaussian::{kl_diag_gaussian, reparam_sample, reparam_with_noise, GaussianParams, LOGVAR_MAX, LOGVAR_MIN};
pub use gradcheck::{grad_check, relative_error, GradCheckReport, ParamAccess};
pub use rng::{splitmix64, RngStream};
pub use softmax::{log_sum_exp, softmax};
pub use tensor::Tensor;
