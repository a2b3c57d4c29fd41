//! Wire-codec round trips: encode∘decode is the identity on randomized
//! client updates, and a committed golden frame decodes to its pinned
//! value (and re-encodes to the same bytes).

mod common;

use common::gen::{golden_envelope, random_params, random_source, random_svc, random_update, spicy_f64};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fedscreen_core::federation::{
    decode_message, encode_message, Body, ClientStats, Envelope, GlobalModel,
};

#[test]
fn encode_decode_is_the_identity_on_random_client_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    for case in 0..1000 {
        let envelope = Envelope::new(rng.random(), Body::Update(random_update(&mut rng)));
        let bytes = encode_message(&envelope);
        let decoded = decode_message(&bytes)
            .unwrap_or_else(|e| panic!("case {case}: decode failed: {e}"));
        assert_eq!(decoded, envelope, "case {case}: value drifted");
        assert_eq!(encode_message(&decoded), bytes, "case {case}: bytes drifted");
    }
}

#[test]
fn encode_decode_covers_the_other_message_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFACADE);
    for _ in 0..100 {
        let d = rng.random_range(1..=4);
        let bodies = [
            Body::Register {
                client_id: random_source(&mut rng),
                n_samples: rng.random_range(1..10_000),
                stats: ClientStats {
                    count: rng.random_range(1..10_000),
                    sums: (0..d).map(|_| spicy_f64(&mut rng)).collect(),
                    sumsqs: (0..d).map(|_| spicy_f64(&mut rng).abs()).collect(),
                },
            },
            Body::Broadcast { params: None },
            Body::Broadcast { params: Some(random_params(&mut rng)) },
            Body::Complete { global: GlobalModel::Fedavg { model: random_svc(&mut rng) } },
        ];
        for body in bodies {
            let envelope = Envelope::new(rng.random(), body);
            let bytes = encode_message(&envelope);
            assert_eq!(decode_message(&bytes).unwrap(), envelope);
        }
    }
}

#[test]
fn golden_frame_decodes_to_its_pinned_value() {
    let bytes = include_bytes!("data/golden_update.json");
    let decoded = decode_message(bytes).expect("golden frame decodes");
    assert_eq!(decoded, golden_envelope(), "golden frame no longer matches its pinned value");
    assert_eq!(
        encode_message(&golden_envelope()).as_slice(),
        *bytes,
        "pinned value no longer encodes to the golden bytes"
    );
}
