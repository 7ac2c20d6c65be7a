//! Central finite differences, the oracle for every hand-derived gradient.

use crate::numcore::Matrix;

/// Central-difference gradient of `f` at `x`.
///
/// The perturbed entries are stored as `f32`, so the step actually taken is
/// `(x + h) - (x - h)` after rounding; that realised width is the divisor.
/// `f` returns `f64` so callers can evaluate the objective in double
/// precision.
pub fn finite_diff_grad<F>(mut f: F, x: &Matrix, h: f32) -> Matrix
where
    F: FnMut(&Matrix) -> f64,
{
    assert!(h > 0.0, "step must be positive");
    let mut probe = x.clone();
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    for idx in 0..x.len() {
        let orig = x.as_slice()[idx];
        let plus = orig + h;
        let minus = orig - h;
        probe.as_mut_slice()[idx] = plus;
        let f_plus = f(&probe);
        probe.as_mut_slice()[idx] = minus;
        let f_minus = f(&probe);
        probe.as_mut_slice()[idx] = orig;
        let width = plus as f64 - minus as f64;
        grad.as_mut_slice()[idx] = ((f_plus - f_minus) / width) as f32;
    }
    grad
}

/// Norm-wise relative error `‖a − b‖ / (‖a‖ + ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    assert!(a.same_shape(b));
    let diff: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    let denom = a.frobenius_norm() + b.frobenius_norm();
    if denom == 0.0 {
        0.0
    } else {
        libm::sqrt(diff) / denom
    }
}
