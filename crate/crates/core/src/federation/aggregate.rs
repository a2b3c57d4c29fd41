//! Coordinator-side aggregation: pooled standardization, parameter
//! averaging, and ensemble construction.
//!
//! Every function sorts its inputs by client id before touching any
//! floating point, so results are bit-identical no matter the order in
//! which updates arrived.

use crate::classifiers::{LinearSvcModel, ModelParams, Standardization};
use crate::dataset::SourceId;

use super::types::{ClientStats, ClientUpdate, EnsembleMember, GlobalModel, MetaWeighting};
use super::FederationError;

/// Pool per-client (count, Σx, Σx²) into one global mean/scale pair.
/// Raw rows never leave the clients; these sums are all the coordinator
/// sees.
pub fn compute_global_standardization(
    stats: &[(SourceId, ClientStats)],
) -> Result<Standardization, FederationError> {
    let Some((_, first)) = stats.first() else {
        return Err(FederationError::EmptyRound("no registered clients".into()));
    };
    let arity = first.sums.len();
    let mut ordered: Vec<&(SourceId, ClientStats)> = stats.iter().collect();
    ordered.sort_by_key(|(id, _)| *id);

    let mut count = 0u64;
    let mut sums = vec![0.0; arity];
    let mut sumsqs = vec![0.0; arity];
    for (id, s) in ordered {
        if s.sums.len() != arity || s.sumsqs.len() != arity {
            return Err(FederationError::SchemaMismatch(format!(
                "client {id} reports {} feature sums, expected {arity}",
                s.sums.len()
            )));
        }
        count += s.count;
        for j in 0..arity {
            sums[j] += s.sums[j];
            sumsqs[j] += s.sumsqs[j];
        }
    }
    Standardization::from_stats(count, &sums, &sumsqs)
        .map_err(|e| FederationError::SchemaMismatch(e.to_string()))
}

/// Sample-count-weighted mean of client SVC parameters.
///
/// Standardization statistics pass through unchanged — they are global
/// and every client must carry the same ones.
pub fn fedavg(updates: &[ClientUpdate]) -> Result<LinearSvcModel, FederationError> {
    if updates.is_empty() {
        return Err(FederationError::EmptyRound("fedavg over zero updates".into()));
    }
    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);

    let mut models = Vec::with_capacity(ordered.len());
    for update in &ordered {
        let ModelParams::Svc(model) = &update.params else {
            return Err(FederationError::SchemaMismatch(format!(
                "client {} sent {} parameters; fedavg averages svc only",
                update.client_id,
                update.params.kind()
            )));
        };
        if update.n_samples == 0 {
            return Err(FederationError::SchemaMismatch(format!(
                "client {} reports zero training samples",
                update.client_id
            )));
        }
        models.push(model);
    }
    let reference = models[0];
    for (update, model) in ordered.iter().zip(&models).skip(1) {
        if model.weights.len() != reference.weights.len() {
            return Err(FederationError::SchemaMismatch(format!(
                "client {} sent arity {}, expected {}",
                update.client_id,
                model.weights.len(),
                reference.weights.len()
            )));
        }
        if model.feature_means != reference.feature_means
            || model.feature_scales != reference.feature_scales
            || model.regularization_c != reference.regularization_c
        {
            return Err(FederationError::SchemaMismatch(format!(
                "client {} disagrees on shared standardization or C",
                update.client_id
            )));
        }
    }

    let total: u64 = ordered.iter().map(|u| u.n_samples).sum();
    let mut weights = vec![0.0; reference.weights.len()];
    let mut bias = 0.0;
    for (update, model) in ordered.iter().zip(&models) {
        // one client ⇒ ratio is exactly 1.0 and the sums below reduce to
        // `0.0 + 1.0 · x = x`, making single-client fedavg the identity
        let ratio = update.n_samples as f64 / total as f64;
        for (acc, &w) in weights.iter_mut().zip(&model.weights) {
            *acc += ratio * w;
        }
        bias += ratio * model.bias;
    }
    Ok(LinearSvcModel {
        weights,
        bias,
        regularization_c: reference.regularization_c,
        feature_means: reference.feature_means.clone(),
        feature_scales: reference.feature_scales.clone(),
    })
}

/// Build the weighted-majority ensemble from one round of local models.
pub fn meta_aggregate(
    updates: &[ClientUpdate],
    weighting: MetaWeighting,
) -> Result<GlobalModel, FederationError> {
    if updates.is_empty() {
        return Err(FederationError::EmptyRound("ensemble over zero updates".into()));
    }
    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);

    let kind = ordered[0].params.kind();
    if let Some(odd) = ordered.iter().find(|u| u.params.kind() != kind) {
        return Err(FederationError::SchemaMismatch(format!(
            "client {} sent {} parameters into a {kind} ensemble",
            odd.client_id,
            odd.params.kind()
        )));
    }

    let raw: Vec<f64> = ordered
        .iter()
        .map(|u| match weighting {
            MetaWeighting::NSamples => u.n_samples as f64,
            MetaWeighting::ValidationAccuracy => u.local_validation_accuracy,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    // all-zero weights (e.g. every validation accuracy is 0) carry no
    // signal; fall back to a uniform vote rather than dividing by zero
    let members = ordered
        .iter()
        .zip(&raw)
        .map(|(update, &w)| EnsembleMember {
            params: update.params.clone(),
            vote_weight: if total > 0.0 { w / total } else { 1.0 / ordered.len() as f64 },
        })
        .collect();
    Ok(GlobalModel::MetaVote { members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::TreeModel;

    fn svc_update(id: SourceId, weights: Vec<f64>, bias: f64, n: u64) -> ClientUpdate {
        let arity = weights.len();
        ClientUpdate {
            client_id: id,
            params: ModelParams::Svc(LinearSvcModel {
                weights,
                bias,
                regularization_c: 1.0,
                feature_means: vec![0.0; arity],
                feature_scales: vec![1.0; arity],
            }),
            n_samples: n,
            local_validation_accuracy: 0.5,
        }
    }

    #[test]
    fn equal_samples_average_to_the_midpoint() {
        let updates = vec![
            svc_update(SourceId::ChildrenUci, vec![1.0, 2.0], 0.5, 10),
            svc_update(SourceId::AdultsUci, vec![3.0, 4.0], 1.5, 10),
        ];
        let avg = fedavg(&updates).unwrap();
        assert_eq!(avg.weights, vec![2.0, 3.0]);
        assert_eq!(avg.bias, 1.0);
    }

    #[test]
    fn unequal_samples_weight_the_mean() {
        // n=1 at [1,2] and n=3 at [3,4] → 0.25·[1,2] + 0.75·[3,4] = [2.5,3.5]
        let updates = vec![
            svc_update(SourceId::ChildrenUci, vec![1.0, 2.0], 0.0, 1),
            svc_update(SourceId::AdultsUci, vec![3.0, 4.0], 0.0, 3),
        ];
        assert_eq!(fedavg(&updates).unwrap().weights, vec![2.5, 3.5]);
    }

    #[test]
    fn single_update_is_the_bitwise_identity() {
        let update = svc_update(SourceId::AdultsKaggle, vec![0.1 + 0.2, -7.25], 0.3, 17);
        let ModelParams::Svc(original) = &update.params else { unreachable!() };
        let avg = fedavg(std::slice::from_ref(&update)).unwrap();
        assert_eq!(avg, *original);
    }

    #[test]
    fn update_order_does_not_change_a_bit() {
        let a = svc_update(SourceId::ChildrenUci, vec![0.123456789, 1.0 / 3.0], 0.7, 11);
        let b = svc_update(SourceId::ChildrenKaggle, vec![2.5, -0.1], -0.2, 23);
        let c = svc_update(SourceId::AdultsUci, vec![1e-8, 9.25], 0.0, 5);
        let forward = fedavg(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let reversed = fedavg(&[c, b, a]).unwrap();
        assert_eq!(
            crate::canonical_json_bytes(&forward),
            crate::canonical_json_bytes(&reversed)
        );
    }

    #[test]
    fn mixed_kinds_are_a_schema_error() {
        let mut updates = vec![
            svc_update(SourceId::ChildrenUci, vec![1.0], 0.0, 5),
            svc_update(SourceId::AdultsUci, vec![2.0], 0.0, 5),
        ];
        updates[1].params = ModelParams::Dt(TreeModel::single_leaf(1, [1, 1], 1));
        assert!(matches!(fedavg(&updates), Err(FederationError::SchemaMismatch(_))));
        assert!(matches!(
            meta_aggregate(&updates, MetaWeighting::NSamples),
            Err(FederationError::SchemaMismatch(_))
        ));
        assert!(matches!(fedavg(&[]), Err(FederationError::EmptyRound(_))));
    }

    #[test]
    fn ensemble_weights_normalize_and_sum_to_one() {
        let updates = vec![
            svc_update(SourceId::ChildrenUci, vec![1.0], 0.0, 30),
            svc_update(SourceId::ChildrenKaggle, vec![2.0], 0.0, 10),
            svc_update(SourceId::AdultsUci, vec![3.0], 0.0, 60),
        ];
        let GlobalModel::MetaVote { members } =
            meta_aggregate(&updates, MetaWeighting::NSamples).unwrap()
        else {
            unreachable!()
        };
        let total: f64 = members.iter().map(|m| m.vote_weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(members[0].vote_weight, 0.3);
        assert_eq!(members[2].vote_weight, 0.6);
    }

    #[test]
    fn zero_accuracy_weights_fall_back_to_uniform() {
        let mut updates = vec![
            svc_update(SourceId::ChildrenUci, vec![1.0], 0.0, 30),
            svc_update(SourceId::AdultsUci, vec![2.0], 0.0, 10),
        ];
        for u in &mut updates {
            u.local_validation_accuracy = 0.0;
        }
        let GlobalModel::MetaVote { members } =
            meta_aggregate(&updates, MetaWeighting::ValidationAccuracy).unwrap()
        else {
            unreachable!()
        };
        assert_eq!(members[0].vote_weight, 0.5);
        assert_eq!(members[1].vote_weight, 0.5);
    }

    #[test]
    fn pooling_one_client_is_its_own_standardization() {
        let stats = ClientStats {
            count: 4,
            sums: vec![10.0, 2.0],
            sumsqs: vec![30.0, 6.0],
        };
        let pooled =
            compute_global_standardization(&[(SourceId::ChildrenUci, stats.clone())]).unwrap();
        let direct =
            Standardization::from_stats(stats.count, &stats.sums, &stats.sumsqs).unwrap();
        assert_eq!(pooled, direct);
    }

    #[test]
    fn pooling_rejects_mismatched_arity() {
        let a = ClientStats { count: 1, sums: vec![1.0], sumsqs: vec![1.0] };
        let b = ClientStats { count: 1, sums: vec![1.0, 2.0], sumsqs: vec![1.0, 4.0] };
        let err = compute_global_standardization(&[
            (SourceId::ChildrenUci, a),
            (SourceId::AdultsUci, b),
        ])
        .unwrap_err();
        assert!(matches!(err, FederationError::SchemaMismatch(_)), "{err}");
    }
}
