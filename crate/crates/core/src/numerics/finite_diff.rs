use crate::error::{Error, Result};

use super::DenseVector;

/// Default central-difference step for `f64` losses of magnitude O(1).
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference gradient `(f(w + h e_i) - f(w - h e_i)) / 2h`.
pub fn finite_diff_grad<F>(f: F, w: &[f64], h: f64) -> Result<DenseVector>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("finite-difference step must be > 0, got {h}")));
    }
    if w.is_empty() {
        return Err(Error::domain("cannot differentiate in zero dimensions"));
    }
    let mut probe = w.to_vec();
    let mut grad = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let plus = f(&probe);
        probe[i] = orig - h;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "objective evaluated to {plus} / {minus} while perturbing coordinate {i}"
            )));
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    DenseVector::new(grad)
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or the absolute error when both are below
/// `1e-12`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff = super::norm(
        &a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>(),
    );
    let scale = super::norm(a).max(super::norm(b));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
