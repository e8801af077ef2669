use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor;

/// Lowercases, splits on whitespace and strips `? , . !` from both ends of
/// each token. Tokens that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(['?', ',', '.', '!']).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Elman encoder weights: `h_t = tanh(W_x · E[id_t] + W_h · h_{t-1} + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextEncoderParams {
    /// `|V| × d_e`
    pub embedding: Tensor,
    /// `d_h × d_e`
    pub w_x: Tensor,
    /// `d_h × d_h`
    pub w_h: Tensor,
    /// `d_h`
    pub b: Tensor,
}

/// Hidden states of one forward pass, kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct TextTrace {
    ids: Vec<usize>,
    /// `states[t]` is `h_{t+1}`.
    states: Vec<Vec<f64>>,
    hidden_dim: usize,
}

impl TextTrace {
    /// Final hidden state, the zero vector for an empty sequence.
    pub fn output(&self) -> Vec<f64> {
        self.states
            .last()
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.hidden_dim])
    }
}

impl TextEncoderParams {
    pub fn zeros(vocab_size: usize, d_e: usize, d_h: usize) -> Self {
        Self {
            embedding: Tensor::zeros(&[vocab_size, d_e]),
            w_x: Tensor::zeros(&[d_h, d_e]),
            w_h: Tensor::zeros(&[d_h, d_h]),
            b: Tensor::zeros(&[d_h]),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.b.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn named(&self) -> [(&'static str, &Tensor); 4] {
        [
            ("embedding", &self.embedding),
            ("w_x", &self.w_x),
            ("w_h", &self.w_h),
            ("b", &self.b),
        ]
    }

    pub fn named_mut(&mut self) -> [(&'static str, &mut Tensor); 4] {
        [
            ("embedding", &mut self.embedding),
            ("w_x", &mut self.w_x),
            ("w_h", &mut self.w_h),
            ("b", &mut self.b),
        ]
    }

    pub fn forward(&self, ids: &[usize]) -> Result<TextTrace> {
        let vocab = self.vocab_size();
        if let Some(&bad) = ids.iter().find(|&&id| id >= vocab) {
            return Err(Error::domain(format!(
                "token id {bad} out of range for vocabulary of {vocab}"
            )));
        }
        let mut states: Vec<Vec<f64>> = Vec::with_capacity(ids.len());
        for &id in ids {
            let mut a = self.w_x.affine(self.embedding.row(id), &self.b);
            if let Some(prev) = states.last() {
                for (ai, r) in a.iter_mut().zip(self.w_h.matvec(prev)) {
                    *ai += r;
                }
            }
            a.iter_mut().for_each(|x| *x = x.tanh());
            states.push(a);
        }
        Ok(TextTrace {
            ids: ids.to_vec(),
            states,
            hidden_dim: self.hidden_dim(),
        })
    }

    /// Backpropagation through time from `d_out = ∂L/∂h_T`, accumulating into `grads`.
    pub fn backward(&self, trace: &TextTrace, d_out: &[f64], grads: &mut TextEncoderParams) {
        let mut dh = d_out.to_vec();
        for t in (0..trace.ids.len()).rev() {
            let h = &trace.states[t];
            let da: Vec<f64> = dh.iter().zip(h).map(|(g, h)| g * (1.0 - h * h)).collect();
            let id = trace.ids[t];
            grads.w_x.add_outer(&da, self.embedding.row(id));
            grads.b.add_slice(&da);
            let dx = self.w_x.matvec_t(&da);
            for (g, d) in grads.embedding.row_mut(id).iter_mut().zip(&dx) {
                *g += d;
            }
            if t > 0 {
                grads.w_h.add_outer(&da, &trace.states[t - 1]);
                dh = self.w_h.matvec_t(&da);
            }
        }
    }
}

/// Final hidden state of the recurrence over `ids` (`h_0 = 0`).
pub fn encode_text(params: &TextEncoderParams, ids: &[usize]) -> Result<Vec<f64>> {
    Ok(params.forward(ids)?.output())
}
