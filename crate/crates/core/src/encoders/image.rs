use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor;

/// `h_v = tanh(W_img · v + b_img)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEncoderParams {
    /// `d_h × d_v`
    pub w_img: Tensor,
    /// `d_h`
    pub b_img: Tensor,
}

impl ImageEncoderParams {
    pub fn zeros(d_v: usize, d_h: usize) -> Self {
        Self {
            w_img: Tensor::zeros(&[d_h, d_v]),
            b_img: Tensor::zeros(&[d_h]),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_img.cols()
    }

    pub fn named(&self) -> [(&'static str, &Tensor); 2] {
        [("w_img", &self.w_img), ("b_img", &self.b_img)]
    }

    pub fn named_mut(&mut self) -> [(&'static str, &mut Tensor); 2] {
        [("w_img", &mut self.w_img), ("b_img", &mut self.b_img)]
    }

    /// Accumulates gradients given the forward output `h_v` and `∂L/∂h_v`.
    pub fn backward(&self, v_raw: &[f64], h_v: &[f64], d_out: &[f64], grads: &mut ImageEncoderParams) {
        let da: Vec<f64> = d_out.iter().zip(h_v).map(|(g, h)| g * (1.0 - h * h)).collect();
        grads.w_img.add_outer(&da, v_raw);
        grads.b_img.add_slice(&da);
    }
}

pub fn encode_image(params: &ImageEncoderParams, v_raw: &[f64]) -> Result<Vec<f64>> {
    if v_raw.len() != params.input_dim() {
        return Err(Error::domain(format!(
            "image feature has {} dims, encoder expects {}",
            v_raw.len(),
            params.input_dim()
        )));
    }
    let mut h = params.w_img.affine(v_raw, &params.b_img);
    h.iter_mut().for_each(|x| *x = x.tanh());
    Ok(h)
}
