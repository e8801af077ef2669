//! Central-difference verification of analytic gradients.

use serde::Serialize;

use super::Tensor;
use crate::error::{Error, Result};

/// A collection of named parameter tensors that can be perturbed in place.
pub trait ParamAccess: Clone {
    fn named_tensors(&self) -> Vec<(String, &Tensor)>;
    fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst_param: String,
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub n_checked: usize,
    /// `(analytic, numeric)` for every checked entry, in parameter order.
    #[serde(skip)]
    pub entries: Vec<(f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }

    /// Entries violating `|a - n| <= rel_tol * max(|a|, |n|) + abs_tol`.
    pub fn count_failing(&self, rel_tol: f64, abs_tol: f64) -> usize {
        self.entries
            .iter()
            .filter(|(a, n)| (a - n).abs() > rel_tol * a.abs().max(n.abs()) + abs_tol)
            .count()
    }
}

/// `|a - b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares the analytic gradient returned by `loss_fn` against
/// `(f(x + h) - f(x - h)) / 2h` for every parameter entry.
///
/// `loss_fn` must be a pure function of the parameters; it is evaluated
/// twice at the base point and a mismatch is reported as a precondition
/// violation (e.g. the noise was redrawn between calls).
pub fn grad_check<P, F>(loss_fn: F, params: &P, h: f64) -> Result<GradCheckReport>
where
    P: ParamAccess,
    F: Fn(&P) -> (f64, P),
{
    if !(h > 0.0) {
        return Err(Error::config(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let (f0, analytic) = loss_fn(params);
    let (f0_again, _) = loss_fn(params);
    if f0.to_bits() != f0_again.to_bits() {
        return Err(Error::Precondition(format!(
            "loss function is not deterministic: {f0} then {f0_again} at the same parameters"
        )));
    }

    let analytic: Vec<(String, Vec<f64>)> = analytic
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.data().to_vec()))
        .collect();
    let shapes: Vec<(String, usize)> = params.named_tensors().into_iter().map(|(n, t)| (n, t.len())).collect();

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        n_checked: 0,
        entries: Vec::new(),
    };
    let mut work = params.clone();
    for (slot, (name, len)) in shapes.iter().enumerate() {
        let (grad_name, grad) = &analytic[slot];
        debug_assert_eq!(grad_name, name);
        for idx in 0..*len {
            let original = work.named_tensors_mut()[slot].1.data()[idx];
            work.named_tensors_mut()[slot].1.data_mut()[idx] = original + h;
            let (f_plus, _) = loss_fn(&work);
            work.named_tensors_mut()[slot].1.data_mut()[idx] = original - h;
            let (f_minus, _) = loss_fn(&work);
            work.named_tensors_mut()[slot].1.data_mut()[idx] = original;

            let numeric = (f_plus - f_minus) / (2.0 * h);
            let err = relative_error(grad[idx], numeric);
            report.n_checked += 1;
            report.entries.push((grad[idx], numeric));
            if err > report.max_rel_error || report.worst_param.is_empty() {
                report.max_rel_error = err;
                report.worst_param = name.clone();
                report.worst_index = idx;
                report.worst_analytic = grad[idx];
                report.worst_numeric = numeric;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[derive(Clone)]
    struct Weights(Vec<Tensor>);

    impl ParamAccess for Weights {
        fn named_tensors(&self) -> Vec<(String, &Tensor)> {
            self.0.iter().enumerate().map(|(i, t)| (format!("w{i}"), t)).collect()
        }
        fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
            self.0
                .iter_mut()
                .enumerate()
                .map(|(i, t)| (format!("w{i}"), t))
                .collect()
        }
    }

    fn scalar(x: f64) -> Tensor {
        Tensor::vector(vec![x]).unwrap()
    }

    #[test]
    fn linear_loss() {
        let x = 3.0;
        let w = Weights(vec![scalar(0.7)]);
        let report = grad_check(|p: &Weights| (p.0[0].data()[0] * x, Weights(vec![scalar(x)])), &w, 1e-5).unwrap();
        assert!(report.max_rel_error < 1e-10, "{report:?}");
        assert_eq!(report.n_checked, 1);
    }

    #[test]
    fn quadratic_and_corrupted() {
        // f = Σ a_i w_i² with analytic gradient 2 a_i w_i
        let a = [1.0, -2.0, 0.5];
        let w = Weights(vec![Tensor::vector(vec![0.3, 1.1, -0.8]).unwrap()]);
        let loss = |p: &Weights, corrupt: f64| {
            let d = p.0[0].data();
            let f = d.iter().zip(&a).map(|(w, a)| a * w * w).sum();
            let mut g: Vec<f64> = d.iter().zip(&a).map(|(w, a)| 2.0 * a * w).collect();
            g[1] *= corrupt;
            (f, Weights(vec![Tensor::vector(g).unwrap()]))
        };
        let good = grad_check(|p: &Weights| loss(p, 1.0), &w, 1e-5).unwrap();
        assert!(good.passed(1e-8), "{good:?}");
        let bad = grad_check(|p: &Weights| loss(p, 1.1), &w, 1e-5).unwrap();
        assert!(bad.max_rel_error > 1e-2);
        assert_eq!(bad.worst_index, 1);
    }

    #[test]
    fn non_deterministic_loss_is_reported() {
        let calls = Cell::new(0u32);
        let w = Weights(vec![scalar(1.0)]);
        let err = grad_check(
            |p: &Weights| {
                calls.set(calls.get() + 1);
                (p.0[0].data()[0] + calls.get() as f64 * 1e-3, p.clone())
            },
            &w,
            1e-5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(0.0, 1e-10) - 1e-2).abs() < 1e-15);
    }
}
