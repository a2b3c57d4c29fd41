//! The three algebraic identities that pin the averaging protocol to
//! centralized training.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::canonical_json_bytes;
use fedscreen_core::classifiers::{
    signed_labels, svc_full_batch_step, ModelParams, Standardization,
};
use fedscreen_core::dataset::{stratified_split_indices, SourceId};
use fedscreen_core::federation::{
    run_federation, train_local, Aggregation, ClientDataset, GlobalModel, LocalSolver,
    RoundConfig, LOCAL_VALIDATION_FRACTION,
};

/// A silo with an exact half/half label balance, so every client's
/// stratified 80/20 split has the same train size.
pub fn balanced_client(id: SourceId, n: usize, rng: &mut ChaCha8Rng) -> ClientDataset {
    assert!(n.is_multiple_of(2));
    let d = 3;
    let features: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
    ClientDataset { client_id: id, features, labels }
}

pub fn svc_fedavg_config() -> RoundConfig {
    RoundConfig {
        aggregation: Aggregation::Fedavg,
        n_rounds: 3,
        local_epochs_per_round: 5,
        seed: 99,
        ..RoundConfig::default()
    }
}

/// Identity (1): federating a single client is bit-identical to
/// training that client centrally.
pub fn check_single_client_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = svc_fedavg_config();
    let client = balanced_client(SourceId::AdultsKaggle, 60, &mut rng);

    let run = run_federation(vec![client.clone()], &cfg).expect("federation runs");
    let local = train_local(client, &cfg).expect("local training runs");

    let GlobalModel::Fedavg { model: federated } = &run.global else {
        panic!("averaging must produce a parametric model");
    };
    let ModelParams::Svc(centralized) = &local.params else {
        panic!("svc training must produce svc parameters");
    };
    assert_eq!(
        canonical_json_bytes(federated),
        canonical_json_bytes(centralized),
        "single-client federation drifted from centralized training"
    );
}

/// Identity (2): one full-batch round over equal shards equals one
/// centralized full-batch step over the pooled shards, within 1e-9.
pub fn check_full_batch_round_equals_central_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eta = 0.05;
    let cfg = RoundConfig {
        aggregation: Aggregation::Fedavg,
        n_rounds: 1,
        solver: LocalSolver::FullBatchStep { eta },
        seed: 7,
        ..RoundConfig::default()
    };
    let clients: Vec<ClientDataset> =
        SourceId::ALL.iter().map(|&id| balanced_client(id, 40, &mut rng)).collect();

    let run = run_federation(clients.clone(), &cfg).expect("federation runs");
    let GlobalModel::Fedavg { model } = &run.global else {
        panic!("averaging must produce a parametric model");
    };

    // Rebuild the union of the clients' local training splits the same
    // way each client does: rank in client-id order seeds the split.
    let mut ordered = clients;
    ordered.sort_by_key(|c| c.client_id);
    let mut pooled_features: Vec<Vec<f64>> = Vec::new();
    let mut pooled_labels: Vec<u8> = Vec::new();
    let mut shard_sizes = Vec::new();
    for (rank, client) in ordered.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(rank as u64);
        let (train_idx, _) =
            stratified_split_indices(&client.labels, LOCAL_VALIDATION_FRACTION, seed)
                .expect("split works");
        shard_sizes.push(train_idx.len());
        for &i in &train_idx {
            pooled_features.push(client.features[i].clone());
            pooled_labels.push(client.labels[i]);
        }
    }
    assert!(
        shard_sizes.windows(2).all(|w| w[0] == w[1]),
        "shards must be equal-sized for this identity: {shard_sizes:?}"
    );

    // One centralized full-batch step from the same zero start, in the
    // coordinate system the coordinator pooled.
    let standardization = Standardization {
        means: model.feature_means.clone(),
        scales: model.feature_scales.clone(),
    };
    let z = standardization.apply(&pooled_features);
    let y = signed_labels(&pooled_labels);
    let mut weights = vec![0.0; z[0].len()];
    let mut bias = 0.0;
    svc_full_batch_step(&z, &y, &mut weights, &mut bias, model.regularization_c, eta)
        .expect("full-batch step runs");

    for (j, (&federated, &centralized)) in model.weights.iter().zip(&weights).enumerate() {
        assert!(
            (federated - centralized).abs() <= 1e-9,
            "weight {j}: federated {federated} vs centralized {centralized}"
        );
    }
    assert!(
        (model.bias - bias).abs() <= 1e-9,
        "bias: federated {} vs centralized {bias}",
        model.bias
    );
}

/// Identity (3): the outcome is invariant, bit for bit, under any
/// reordering of the client list.
pub fn check_client_order_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = svc_fedavg_config();
    let clients: Vec<ClientDataset> = SourceId::ALL
        .iter()
        .map(|&id| balanced_client(id, 30 + 10 * (id as usize % 3), &mut rng))
        .collect();

    let forward = run_federation(clients.clone(), &cfg).expect("forward order runs");
    let mut reversed = clients.clone();
    reversed.reverse();
    let backward = run_federation(reversed, &cfg).expect("reversed order runs");
    let mut rotated = clients;
    rotated.rotate_left(2);
    let cycled = run_federation(rotated, &cfg).expect("rotated order runs");

    let forward_bytes = canonical_json_bytes(&forward.global);
    assert_eq!(forward_bytes, canonical_json_bytes(&backward.global));
    assert_eq!(forward_bytes, canonical_json_bytes(&cycled.global));
    assert_eq!(canonical_json_bytes(&forward.rounds), canonical_json_bytes(&backward.rounds));
    assert_eq!(forward.transcript, backward.transcript);
}
