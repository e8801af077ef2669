use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major array of `f64` with an explicit shape.
///
/// Rank-2 tensors are laid out `[rows, cols]` and act as linear maps
/// `R^cols -> R^rows` through [`Tensor::matvec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::domain(format!(
                "tensor shape must be non-empty with positive dims, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != values.len() {
            return Err(Error::domain(format!(
                "shape {shape:?} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite value at flat index {pos}")));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "invalid shape {shape:?}"
        );
        Self {
            shape: shape.to_vec(),
            values: vec![0.0; shape.iter().product()],
        }
    }

    pub fn vector(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values.len()], values)
    }

    pub fn matrix(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.values
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.values[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, value: f64) {
        self.values.iter_mut().for_each(|x| *x = value);
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// `W · x` for a rank-2 `W`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        debug_assert_eq!(cols, x.len());
        self.values.chunks_exact(cols).map(|row| dot(row, x)).collect()
    }

    /// `W · x + b`.
    pub fn affine(&self, x: &[f64], bias: &Tensor) -> Vec<f64> {
        let mut out = self.matvec(x);
        for (o, b) in out.iter_mut().zip(bias.data()) {
            *o += b;
        }
        out
    }

    /// `Wᵀ · y` for a rank-2 `W`.
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        debug_assert_eq!(self.rows(), y.len());
        let mut out = vec![0.0; cols];
        for (row, &yi) in self.values.chunks_exact(cols).zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * yi;
            }
        }
        out
    }

    /// `self += a ⊗ b` for a rank-2 tensor with `rows == a.len()` and `cols == b.len()`.
    pub fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        let cols = self.cols();
        debug_assert_eq!(self.rows(), a.len());
        debug_assert_eq!(cols, b.len());
        for (row, &ai) in self.values.chunks_exact_mut(cols).zip(a) {
            if ai == 0.0 {
                continue;
            }
            for (r, bj) in row.iter_mut().zip(b) {
                *r += ai * bj;
            }
        }
    }

    /// Elementwise `self += other`.
    pub fn add_slice(&mut self, other: &[f64]) {
        debug_assert_eq!(self.values.len(), other.len());
        for (s, o) in self.values.iter_mut().zip(other) {
            *s += o;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|x| *x *= factor);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_length_mismatch_and_non_finite() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(Tensor::new(vec![0], vec![]).is_err());
        assert!(Tensor::vector(vec![1.0, f64::NAN]).is_err());
        assert!(Tensor::vector(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn matvec_and_transpose() {
        let w = Tensor::matrix(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(w.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(w.matvec_t(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn outer_accumulates() {
        let mut g = Tensor::zeros(&[2, 2]);
        g.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        g.add_outer(&[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(g.data(), &[4.0, 5.0, 6.0, 8.0]);
    }
}
