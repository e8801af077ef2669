//! Record fields to fixed-width vectors: tokenizer, vocabulary, the Elman
//! text encoder used for questions and captions, the image projection, and
//! the elementwise fusion that forms the joint image-question vector `j`.

mod image;
mod text;
mod vocab;

pub use image::{encode_image, ImageEncoderParams};
pub use text::{encode_text, tokenize, TextEncoderParams, TextTrace};
pub use vocab::{Vocabulary, PAD, PAD_ID, UNK, UNK_ID};

use crate::error::{Error, Result};

/// Joint representation `j = h_v ⊙ h_q`.
pub fn fuse(h_v: &[f64], h_q: &[f64]) -> Result<Vec<f64>> {
    if h_v.len() != h_q.len() {
        return Err(Error::domain(format!(
            "cannot fuse vectors of length {} and {}",
            h_v.len(),
            h_q.len()
        )));
    }
    Ok(h_v.iter().zip(h_q).map(|(a, b)| a * b).collect())
}
