use libm::powf;

use crate::numcore::Matrix;
use crate::{Error, Result};

/// Per-parameter Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Matrix,
    pub v: Matrix,
    pub t: u64,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
}

impl AdamState {
    /// Fresh state shaped like `param`, with beta1 = 0.9, beta2 = 0.999,
    /// epsilon = 1e-8.
    pub fn new(param: &Matrix) -> Self {
        Self {
            m: Matrix::zeros(param.rows(), param.cols()),
            v: Matrix::zeros(param.rows(), param.cols()),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update of `param` in place.
pub fn adam_step(param: &mut Matrix, grad: &Matrix, state: &mut AdamState, lr: f32) -> Result<()> {
    for other in [grad, &state.m, &state.v] {
        if !param.same_shape(other) {
            return Err(Error::ShapeMismatch {
                op: "adam_step",
                lhs_rows: param.rows(),
                lhs_cols: param.cols(),
                rhs_rows: other.rows(),
                rhs_cols: other.cols(),
            });
        }
    }
    state.t += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    let t = state.t.min(i32::MAX as u64) as f32;
    let c1 = 1.0 - powf(b1, t);
    let c2 = 1.0 - powf(b2, t);
    let p = param.as_mut_slice();
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (i, &g) in grad.as_slice().iter().enumerate() {
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        p[i] -= lr * m_hat / (libm::sqrtf(v_hat) + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_against_the_gradient() {
        let lr = 0.005;
        let mut p = Matrix::zeros(1, 4);
        let g = Matrix::from_rows(&[[0.3, -2.0, 1e-3, -7.5]]);
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &g, &mut st, lr).unwrap();
        assert_eq!(st.t, 1);
        for (dp, gi) in p.as_slice().iter().zip(g.as_slice()) {
            assert_eq!(dp.signum(), -gi.signum());
            assert!(dp.abs() >= 0.999 * lr && dp.abs() <= lr * (1.0 + 1e-6), "{dp}");
        }
    }

    #[test]
    fn zero_gradient_leaves_parameter() {
        let mut p = Matrix::from_rows(&[[1.0, -1.0]]);
        let before = p.clone();
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &Matrix::zeros(1, 2), &mut st, 0.1).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let run = || {
            let mut p = Matrix::from_rows(&[[0.5, -0.25, 2.0]]);
            let mut st = AdamState::new(&p);
            for k in 0..50 {
                let g = p.map(|x| x * 2.0 - k as f32 * 0.01);
                adam_step(&mut p, &g, &mut st, 0.01).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn shape_mismatch() {
        let mut p = Matrix::zeros(2, 2);
        let mut st = AdamState::new(&p);
        assert!(adam_step(&mut p, &Matrix::zeros(1, 2), &mut st, 0.1).is_err());
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut p = Matrix::zeros(1, 3);
        let mut st = AdamState::new(&p);
        for k in 0..10 {
            let g = Matrix::from_rows(&[[k as f32 - 5.0, 0.1, -3.0]]);
            adam_step(&mut p, &g, &mut st, 0.01).unwrap();
        }
        assert!(st.v.as_slice().iter().all(|&x| x >= 0.0));
    }
}
