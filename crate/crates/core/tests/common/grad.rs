//! Finite-difference validation of the SVC subgradient.
//!
//! The training objective is piecewise quadratic: quadratic in the L2
//! term, linear in each active hinge, with kinks exactly where a
//! sample's margin equals 1. Away from those kinks the function is
//! differentiable and a central difference is exact up to roundoff, so
//! the analytic gradient must match it tightly.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::classifiers::{svc_objective, svc_subgradient, LinearSvcModel};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-5;
/// Keep every sample's |margin − 1| above this so no finite-difference
/// probe can cross a kink (probe moves margins by ≤ STEP·max‖z‖ ≪ this).
pub const KINK_CLEARANCE: f64 = 1e-3;

pub struct Instance {
    pub model: LinearSvcModel,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(2..=8);
    let d = rng.random_range(1..=4);
    let features: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
    labels[0] = 0;
    labels[n - 1] = 1;
    let model = LinearSvcModel {
        weights: (0..d).map(|_| rng.random_range(-1.5..1.5)).collect(),
        bias: rng.random_range(-1.0..1.0),
        regularization_c: rng.random_range(0.3..3.0),
        feature_means: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        feature_scales: (0..d).map(|_| rng.random_range(0.5..2.0)).collect(),
    };
    Instance { model, features, labels }
}

/// Smallest |margin − 1| over the samples, in standardized coordinates.
pub fn kink_distance(inst: &Instance) -> f64 {
    let z = inst.model.standardization().apply(&inst.features);
    z.iter()
        .zip(&inst.labels)
        .map(|(zi, &label)| {
            let y = if label == 1 { 1.0 } else { -1.0 };
            let margin: f64 = zi.iter().zip(&inst.model.weights).map(|(a, b)| a * b).sum::<f64>()
                + inst.model.bias;
            (y * margin - 1.0).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn objective_at(inst: &Instance, weights: &[f64], bias: f64) -> f64 {
    let mut probe = inst.model.clone();
    probe.weights = weights.to_vec();
    probe.bias = bias;
    svc_objective(&probe, &inst.features, &inst.labels).expect("objective evaluates")
}

/// Compare the analytic subgradient against central finite differences
/// on `required` random instances whose margins stay clear of the hinge
/// kinks. Panics on the first mismatch; returns the instance count.
pub fn check_gradient_instances(seed: u64, required: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < required {
        attempts += 1;
        assert!(attempts < 30 * required, "kink rejection loop runs away");
        let inst = random_instance(&mut rng);
        if kink_distance(&inst) < KINK_CLEARANCE {
            continue;
        }

        let (grad_w, grad_b) =
            svc_subgradient(&inst.model, &inst.features, &inst.labels).expect("gradient evaluates");

        let w = inst.model.weights.clone();
        for j in 0..w.len() {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[j] += STEP;
            minus[j] -= STEP;
            let numeric = (objective_at(&inst, &plus, inst.model.bias)
                - objective_at(&inst, &minus, inst.model.bias))
                / (2.0 * STEP);
            assert!(
                (grad_w[j] - numeric).abs() <= TOLERANCE,
                "instance {checked}, weight {j}: analytic {} vs numeric {numeric}",
                grad_w[j]
            );
        }
        let numeric_b = (objective_at(&inst, &w, inst.model.bias + STEP)
            - objective_at(&inst, &w, inst.model.bias - STEP))
            / (2.0 * STEP);
        assert!(
            (grad_b - numeric_b).abs() <= TOLERANCE,
            "instance {checked}, bias: analytic {grad_b} vs numeric {numeric_b}"
        );
        checked += 1;
    }
    checked
}
