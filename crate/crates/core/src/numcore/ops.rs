//! Activations and losses.
//!
//! The public functions validate their inputs. Model code calls the
//! unchecked `*_raw` variants in its inner loops and checks finiteness at
//! step boundaries instead.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Probability clamp applied by [`bce`] and [`cross_entropy`].
pub const PROB_EPS: f32 = 1e-7;

fn finite(x: f32, what: &'static str) -> Result<f32> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

#[inline]
pub(crate) fn sigmoid_raw(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::expf(-x))
    } else {
        let e = libm::expf(x);
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn tanh_raw(x: f32) -> f32 {
    libm::tanhf(x)
}

pub fn sigmoid(x: f32) -> Result<f32> {
    finite(x, "sigmoid input").map(sigmoid_raw)
}

pub fn tanh(x: f32) -> Result<f32> {
    finite(x, "tanh input").map(tanh_raw)
}

pub fn relu(x: f32) -> Result<f32> {
    finite(x, "relu input").map(|x| x.max(0.0))
}

/// Max-shifted softmax. The normaliser is accumulated in `f64`.
pub fn softmax(v: &[f32]) -> Result<Vec<f32>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("softmax input"));
    }
    Ok(softmax_raw(v))
}

pub(crate) fn softmax_raw(v: &[f32]) -> Vec<f32> {
    let max = v.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = v.iter().map(|&x| libm::exp((x - max) as f64)).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| (e / sum) as f32).collect()
}

/// `-ln(probs[target])`, with the probability clamped below at [`PROB_EPS`].
pub fn cross_entropy(probs: &[f32], target: usize) -> Result<f32> {
    let p = *probs.get(target).ok_or(Error::IdOutOfRange {
        id: target as u32,
        max: probs.len().saturating_sub(1) as u32,
    })?;
    Ok(-libm::logf(p.max(PROB_EPS)))
}

/// Binary cross-entropy of a probability against a 0/1 label.
pub fn bce(prob: f32, label: f32) -> f32 {
    let p = prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(label * libm::logf(p) + (1.0 - label) * libm::logf(1.0 - p))
}

/// BCE of `sigmoid(logit)` computed without forming the probability:
/// `max(s, 0) - y s + ln(1 + e^{-|s|})`. Its derivative in `s` is
/// `sigmoid(s) - y`.
pub fn bce_with_logits(logit: f32, label: f32) -> f32 {
    logit.max(0.0) - label * logit + libm::log1pf(libm::expf(-logit.abs()))
}

/// Cross-entropy of `softmax(logits)` at `target`, via log-sum-exp.
/// Returns the loss and the softmax probabilities.
pub(crate) fn cross_entropy_with_logits(logits: &[f32], target: usize) -> (f32, Vec<f32>) {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f64> = logits.iter().map(|&x| libm::exp((x - max) as f64)).collect();
    let sum: f64 = exps.iter().sum();
    let loss = (libm::log(sum) - (logits[target] - max) as f64) as f32;
    (loss, exps.iter().map(|e| (e / sum) as f32).collect())
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f32]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Whether `target` is among the `k` best entries, ties broken by lower index.
pub fn in_top_k(v: &[f32], target: usize, k: usize) -> bool {
    let t = v[target];
    let better = v
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x > t || (x == t && i < target))
        .count();
    better < k
}
