//! Linear support vector classifier trained by primal subgradient descent.
//!
//! The objective is J(w, b) = ½‖w‖² + C·Σᵢ max(0, 1 − yᵢ(w·zᵢ + b)) over
//! standardized features zᵢ, with labels mapped {0,1} → {−1,+1}. One
//! seeded shuffle fixes the sample order for the whole run; the step
//! size is η_t = 1/(C·t) with t counting every subgradient step taken.
//! Each step descends one term of the decomposition
//! J = Σᵢ [‖w‖²/(2n) + C·hingeᵢ], so an epoch's steps sum to a true
//! subgradient of J and the walk settles at J's minimizer rather than
//! at an n-times-over-regularized one.
//! After each epoch the objective is evaluated and the parameters either
//! become the new best iterate or revert to it, so the model returned is
//! the lowest-objective iterate seen and the final state *is* that
//! iterate. That makes a run resumable: feeding the returned state and
//! step count back in continues the identical trajectory, which is what
//! lets a one-client federation match centralized training bit for bit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierError, SvcConfig};

/// Smallest variance treated as non-constant; below it the scale
/// becomes 1 so constant columns standardize to exactly 0.
const VARIANCE_FLOOR: f64 = 1e-12;

/// Column-wise location and scale for feature standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    /// Fit means and scales from raw feature rows.
    pub fn fit(features: &[Vec<f64>]) -> Result<Standardization, ClassifierError> {
        let (count, sums, sumsqs) = sufficient_stats(features)?;
        Standardization::from_stats(count, &sums, &sumsqs)
    }

    /// Build from pooled sufficient statistics. Federated standardization
    /// sums per-client (count, Σx, Σx²) and calls this, so a single
    /// client reproduces [`Standardization::fit`] exactly.
    pub fn from_stats(
        count: u64,
        sums: &[f64],
        sumsqs: &[f64],
    ) -> Result<Standardization, ClassifierError> {
        if count == 0 {
            return Err(ClassifierError::Training("cannot standardize zero samples".into()));
        }
        if sums.len() != sumsqs.len() {
            return Err(ClassifierError::Shape(format!(
                "sum/sumsq arity mismatch: {} vs {}",
                sums.len(),
                sumsqs.len()
            )));
        }
        let n = count as f64;
        let mut means = Vec::with_capacity(sums.len());
        let mut scales = Vec::with_capacity(sums.len());
        for (&s, &sq) in sums.iter().zip(sumsqs) {
            let mean = s / n;
            let variance = sq / n - mean * mean;
            means.push(mean);
            scales.push(if variance > VARIANCE_FLOOR { variance.sqrt() } else { 1.0 });
        }
        Ok(Standardization { means, scales })
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((&x, &m), &s)| (x - m) / s)
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

/// Per-column (count, Σx, Σx²) over validated finite rows.
pub(crate) fn sufficient_stats(
    features: &[Vec<f64>],
) -> Result<(u64, Vec<f64>, Vec<f64>), ClassifierError> {
    let arity = check_features(features)?;
    let mut sums = vec![0.0; arity];
    let mut sumsqs = vec![0.0; arity];
    for row in features {
        for (j, &x) in row.iter().enumerate() {
            sums[j] += x;
            sumsqs[j] += x * x;
        }
    }
    Ok((features.len() as u64, sums, sumsqs))
}

/// A trained linear SVC: decision function w·standardize(x) + b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvcModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization_c: f64,
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
}

impl LinearSvcModel {
    pub fn standardization(&self) -> Standardization {
        Standardization { means: self.feature_means.clone(), scales: self.feature_scales.clone() }
    }
}

/// Map {0,1} labels to the signed {−1,+1} form the hinge loss uses.
pub fn signed_labels(labels: &[u8]) -> Vec<f64> {
    labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// Train from scratch: standardize, shuffle once by seed, run
/// accept/revert epochs from the zero iterate.
pub fn svc_train(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &SvcConfig,
    seed: u64,
) -> Result<LinearSvcModel, ClassifierError> {
    check_labels(features.len(), labels)?;
    check_svc_config(cfg)?;
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(ClassifierError::Training(
            "training data must contain both labels".into(),
        ));
    }
    let standardization = Standardization::fit(features)?;
    let z = standardization.apply(features);
    let y = signed_labels(labels);

    let mut order: Vec<usize> = (0..z.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut weights = vec![0.0; z[0].len()];
    let mut bias = 0.0;
    svc_run_epochs(&z, &y, &mut weights, &mut bias, cfg, &order, 0, cfg.epochs)?;

    Ok(LinearSvcModel {
        weights,
        bias,
        regularization_c: cfg.c,
        feature_means: standardization.means,
        feature_scales: standardization.scales,
    })
}

/// Run `epochs` accept/revert epochs over standardized data from an
/// explicit starting iterate, mutating it in place.
///
/// `t_offset` is the number of subgradient steps taken before this call;
/// the η_t = 1/(C·t) schedule resumes from there, so a run split into
/// consecutive calls (with the same `order`) retraces one continuous
/// run. The best iterate is re-seeded from the incoming parameters, and
/// the state after every epoch equals the best iterate so far — which is
/// why chaining calls through the returned state loses nothing. Returns
/// the objective of the final (best) iterate.
#[allow(clippy::too_many_arguments)]
pub fn svc_run_epochs(
    z: &[Vec<f64>],
    y: &[f64],
    weights: &mut [f64],
    bias: &mut f64,
    cfg: &SvcConfig,
    order: &[usize],
    t_offset: u64,
    epochs: usize,
) -> Result<f64, ClassifierError> {
    let n = z.len();
    if n == 0 {
        return Err(ClassifierError::Training("empty training set".into()));
    }
    if y.len() != n || order.len() != n {
        return Err(ClassifierError::Shape(format!(
            "rows {n}, labels {}, order {} must all agree",
            y.len(),
            order.len()
        )));
    }
    check_svc_config(cfg)?;

    let mut best_w = weights.to_vec();
    let mut best_b = *bias;
    let mut best_j = objective_standardized(z, y, weights, *bias, cfg.c);
    let mut t = t_offset;
    let reg_share = 1.0 / n as f64;
    for _ in 0..epochs {
        for &i in order {
            t += 1;
            let eta = 1.0 / (cfg.c * t as f64);
            let zi = &z[i];
            let margin = y[i] * (dot(weights, zi) + *bias);
            if margin < 1.0 {
                for (wj, &zij) in weights.iter_mut().zip(zi) {
                    *wj -= eta * (reg_share * *wj - cfg.c * y[i] * zij);
                }
                *bias -= eta * (-cfg.c * y[i]);
            } else {
                for wj in weights.iter_mut() {
                    *wj -= eta * reg_share * *wj;
                }
            }
        }
        let j = objective_standardized(z, y, weights, *bias, cfg.c);
        if j <= best_j {
            best_j = j;
            best_w.copy_from_slice(weights);
            best_b = *bias;
        } else {
            weights.copy_from_slice(&best_w);
            *bias = best_b;
        }
    }
    if !best_j.is_finite() {
        return Err(ClassifierError::Numeric(format!("objective diverged to {best_j}")));
    }
    Ok(best_j)
}

/// One full-batch subgradient step with the data term averaged over the
/// local sample count: w ← w − η·(w + (C/n)·Σ ∂hinge). Averaging makes
/// the step linear in per-sample contributions, so sample-weighted
/// averaging of shard-local steps from a common start equals the
/// centralized step on the pooled data — the identity the federation
/// tests pin down.
pub fn svc_full_batch_step(
    z: &[Vec<f64>],
    y: &[f64],
    weights: &mut [f64],
    bias: &mut f64,
    c: f64,
    eta: f64,
) -> Result<(), ClassifierError> {
    if z.is_empty() {
        return Err(ClassifierError::Training("empty training set".into()));
    }
    let (hinge_w, hinge_b) = hinge_subgradient_sum(z, y, weights, *bias);
    let scale = c / z.len() as f64;
    for (wj, hj) in weights.iter_mut().zip(&hinge_w) {
        *wj -= eta * (*wj + scale * hj);
    }
    *bias -= eta * (scale * hinge_b);
    Ok(())
}

/// J(w, b) over raw features, standardized through the model.
pub fn svc_objective(
    model: &LinearSvcModel,
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<f64, ClassifierError> {
    let z = check_against_model(model, features, labels)?;
    let y = signed_labels(labels);
    Ok(objective_standardized(&z, &y, &model.weights, model.bias, model.regularization_c))
}

/// A subgradient of J at the model's parameters: (∂J/∂w, ∂J/∂b).
pub fn svc_subgradient(
    model: &LinearSvcModel,
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<(Vec<f64>, f64), ClassifierError> {
    let z = check_against_model(model, features, labels)?;
    let y = signed_labels(labels);
    let (hinge_w, hinge_b) = hinge_subgradient_sum(&z, &y, &model.weights, model.bias);
    let c = model.regularization_c;
    let grad_w = model
        .weights
        .iter()
        .zip(&hinge_w)
        .map(|(&wj, &hj)| wj + c * hj)
        .collect();
    Ok((grad_w, c * hinge_b))
}

/// Σ max(0, 1 − yᵢ(w·zᵢ + b)) over standardized rows — the data term of
/// the objective without the C weight or the regularizer.
pub fn svc_data_loss(z: &[Vec<f64>], y: &[f64], weights: &[f64], bias: f64) -> f64 {
    z.iter()
        .zip(y)
        .map(|(zi, &yi)| (1.0 - yi * (dot(weights, zi) + bias)).max(0.0))
        .sum()
}

/// Signed distance to the decision boundary for one raw feature row.
pub fn svc_margin(model: &LinearSvcModel, features: &[f64]) -> Result<f64, ClassifierError> {
    if features.len() != model.weights.len() {
        return Err(ClassifierError::Shape(format!(
            "expected {} features, got {}",
            model.weights.len(),
            features.len()
        )));
    }
    let z = model.standardization().apply_row(features);
    Ok(dot(&model.weights, &z) + model.bias)
}

/// Predicted label; the margin-0 tie goes to 1 (screening-positive).
pub fn svc_predict(model: &LinearSvcModel, features: &[f64]) -> Result<u8, ClassifierError> {
    Ok(u8::from(svc_margin(model, features)? >= 0.0))
}

fn objective_standardized(z: &[Vec<f64>], y: &[f64], weights: &[f64], bias: f64, c: f64) -> f64 {
    let reg: f64 = 0.5 * dot(weights, weights);
    reg + c * svc_data_loss(z, y, weights, bias)
}

/// Σ over active samples of (−yᵢzᵢ, −yᵢ): the hinge part of the
/// subgradient before any C or 1/n scaling.
fn hinge_subgradient_sum(z: &[Vec<f64>], y: &[f64], weights: &[f64], bias: f64) -> (Vec<f64>, f64) {
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (zi, &yi) in z.iter().zip(y) {
        if yi * (dot(weights, zi) + bias) < 1.0 {
            for (gj, &zij) in grad_w.iter_mut().zip(zi) {
                *gj -= yi * zij;
            }
            grad_b -= yi;
        }
    }
    (grad_w, grad_b)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn check_features(features: &[Vec<f64>]) -> Result<usize, ClassifierError> {
    let Some(first) = features.first() else {
        return Err(ClassifierError::Training("empty training set".into()));
    };
    let arity = first.len();
    if arity == 0 {
        return Err(ClassifierError::Shape("rows must have at least one feature".into()));
    }
    for (i, row) in features.iter().enumerate() {
        if row.len() != arity {
            return Err(ClassifierError::Shape(format!(
                "row {i} has {} features, expected {arity}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(ClassifierError::Numeric(format!(
                "non-finite feature at row {i}, column {j}"
            )));
        }
    }
    Ok(arity)
}

fn check_labels(rows: usize, labels: &[u8]) -> Result<(), ClassifierError> {
    if labels.len() != rows {
        return Err(ClassifierError::Shape(format!(
            "{rows} rows but {} labels",
            labels.len()
        )));
    }
    if let Some(i) = labels.iter().position(|&l| l > 1) {
        return Err(ClassifierError::Training(format!(
            "label at row {i} is {}, expected 0 or 1",
            labels[i]
        )));
    }
    Ok(())
}

fn check_svc_config(cfg: &SvcConfig) -> Result<(), ClassifierError> {
    if !(cfg.c.is_finite() && cfg.c > 0.0) {
        return Err(ClassifierError::Training(format!("C must be finite and positive, got {}", cfg.c)));
    }
    Ok(())
}

fn check_against_model(
    model: &LinearSvcModel,
    features: &[Vec<f64>],
    labels: &[u8],
) -> Result<Vec<Vec<f64>>, ClassifierError> {
    let arity = check_features(features)?;
    check_labels(features.len(), labels)?;
    if arity != model.weights.len() {
        return Err(ClassifierError::Shape(format!(
            "model expects {} features, data has {arity}",
            model.weights.len()
        )));
    }
    Ok(model.standardization().apply(features))
}
