//! Hand-derived gradients against central differences of the f64 oracles.

use gramweave_core::lstm::Readout;
use gramweave_core::oracle::{gcn_gradient_check, lstm_gradient_check};

const TOL: f64 = 1e-4;

#[test]
fn gcn_link_loss_gradients() {
    let mut checked = 0;
    let mut seed = 0;
    while checked < 25 {
        if let Some(report) = gcn_gradient_check(seed) {
            assert!(report.worst() < TOL, "seed {seed}: {:?}", report.errors);
            checked += 1;
        }
        seed += 1;
        assert!(seed < 1000, "too many instances rejected");
    }
}

#[test]
fn lstm_cross_entropy_gradients_last_real() {
    for seed in 0..25 {
        let report = lstm_gradient_check(seed, Readout::LastReal);
        assert!(report.worst() < TOL, "seed {seed}: {:?}", report.errors);
    }
}

#[test]
fn lstm_cross_entropy_gradients_final_step() {
    for seed in 100..125 {
        let report = lstm_gradient_check(seed, Readout::FinalStep);
        assert!(report.worst() < TOL, "seed {seed}: {:?}", report.errors);
    }
}
