//! Latent-variable visual question answering at desk scale.
//!
//! A caption latent `z` with a conditional Gaussian prior `p(z | v, q)` and a
//! caption posterior `q(z | c)`, plus a discrete answer-category latent `d`
//! that is summed out exactly at prediction time. Everything runs on a
//! procedurally generated shapes-and-colors world so each mechanism can be
//! checked against an independent oracle.
//!
//! Layout:
//! - [`numcore`]: tensors, the seeded PRNG, Gaussian helpers, softmax, Adam, gradient checking.
//! - [`encoders`]: tokenizer, vocabulary, Elman text encoder, image projection, fusion.
//! - [`latentvqa`]: the model, its training loss with a hand-written backward pass, and prediction.
//! - [`synthdata`]: scene generator, question templates, captions, dataset I/O.
//! - [`harness`]: training loop, evaluation, checkpoints, ablation runner and CLI.

pub mod canonical_json;
pub mod encoders;
pub mod error;
pub mod harness;
pub mod latentvqa;
pub mod numcore;
pub mod synthdata;

pub use error::{Error, Result};
