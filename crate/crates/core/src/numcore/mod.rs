//! Dense `f32` matrices, activations, losses, finite differences and Adam.

mod adam;
mod gradcheck;
mod matrix;
mod ops;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{finite_diff_grad, relative_error};
pub use matrix::Matrix;
pub(crate) use matrix::dot;
pub(crate) use ops::{cross_entropy_with_logits, sigmoid_raw, softmax_raw, tanh_raw};
pub use ops::{argmax, bce, bce_with_logits, cross_entropy, in_top_k, relu, sigmoid, softmax, tanh, PROB_EPS};
