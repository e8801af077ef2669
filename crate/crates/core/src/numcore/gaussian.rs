use serde::{Deserialize, Serialize};

use super::RngStream;
use crate::error::{Error, Result};

pub const LOGVAR_MIN: f64 = -10.0;
pub const LOGVAR_MAX: f64 = 10.0;

/// Diagonal Gaussian `N(mu, exp(logvar))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: Vec<f64>,
    pub logvar: Vec<f64>,
}

impl GaussianParams {
    /// Builds the distribution, clamping `logvar` into `[LOGVAR_MIN, LOGVAR_MAX]`.
    pub fn new(mu: Vec<f64>, logvar: Vec<f64>) -> Result<Self> {
        if mu.len() != logvar.len() {
            return Err(Error::domain(format!(
                "mu has {} dims but logvar has {}",
                mu.len(),
                logvar.len()
            )));
        }
        Ok(Self {
            mu,
            logvar: logvar.into_iter().map(clamp_logvar).collect(),
        })
    }

    pub fn standard(dim: usize) -> Self {
        Self {
            mu: vec![0.0; dim],
            logvar: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn std(&self) -> Vec<f64> {
        self.logvar.iter().map(|lv| (0.5 * lv).exp()).collect()
    }
}

pub(crate) fn clamp_logvar(x: f64) -> f64 {
    x.clamp(LOGVAR_MIN, LOGVAR_MAX)
}

/// Closed-form `KL(q ‖ p)` between diagonal Gaussians, summed over dimensions.
pub fn kl_diag_gaussian(mu_q: &[f64], logvar_q: &[f64], mu_p: &[f64], logvar_p: &[f64]) -> Result<f64> {
    let n = mu_q.len();
    if logvar_q.len() != n || mu_p.len() != n || logvar_p.len() != n {
        return Err(Error::domain(format!(
            "kl_diag_gaussian shape mismatch: {} / {} / {} / {}",
            n,
            logvar_q.len(),
            mu_p.len(),
            logvar_p.len()
        )));
    }
    Ok(kl_terms(mu_q, logvar_q, mu_p, logvar_p).sum())
}

pub(crate) fn kl_terms<'a>(
    mu_q: &'a [f64],
    logvar_q: &'a [f64],
    mu_p: &'a [f64],
    logvar_p: &'a [f64],
) -> impl Iterator<Item = f64> + 'a {
    (0..mu_q.len()).map(move |i| {
        let diff = mu_q[i] - mu_p[i];
        0.5 * (logvar_p[i] - logvar_q[i] + (logvar_q[i].exp() + diff * diff) * (-logvar_p[i]).exp() - 1.0)
    })
}

/// `z = mu + exp(logvar / 2) ⊙ eps` for caller-supplied noise.
pub fn reparam_with_noise(g: &GaussianParams, eps: &[f64]) -> Vec<f64> {
    debug_assert_eq!(g.dim(), eps.len());
    g.mu.iter()
        .zip(&g.logvar)
        .zip(eps)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect()
}

/// Draws `eps ~ N(0, I)` from `rng` and applies [`reparam_with_noise`].
pub fn reparam_sample(g: &GaussianParams, rng: &mut RngStream) -> Vec<f64> {
    let eps = rng.normal_vec(g.dim());
    reparam_with_noise(g, &eps)
}
