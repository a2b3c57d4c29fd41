//! The acceptance gate: one test per pinned criterion, each printing a
//! PASS line with its measured runtime and failing if the pinned time
//! budget is exceeded.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion PASS lines.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use fedscreen_core::classifiers::ClassifierKind;
use fedscreen_core::dataset::{qchat_score, SourceId};
use fedscreen_core::evaluation::{confusion, metrics, Condition, MetricsReport};
use fedscreen_core::federation::{decode_message, encode_message, Body, Envelope};
use fedscreen_core::pipeline::{
    run_federate, run_ingest, run_report, run_train_local, MatrixScope, RunConfig,
};
use fedscreen_core::synthetic::generate_fixture_csvs;

/// Run one criterion against its time budget and report the outcome.
fn timed(name: &str, budget: Duration, check: impl FnOnce() -> String) {
    let start = Instant::now();
    let detail = check();
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{name}: {detail}, but took {elapsed:.2?} (budget {budget:.2?})"
    );
    println!("PASS {name}: {detail} in {elapsed:.2?} (budget {budget:.2?})");
}

// ---------------------------------------------------------------------

#[test]
fn criterion_qchat_exhaustive_scoring() {
    timed("criterion_qchat_exhaustive_scoring", Duration::from_secs(1), || {
        for bits in 0u16..1024 {
            let responses: [u8; 10] = std::array::from_fn(|i| ((bits >> i) & 1) as u8);
            let expected_score: u8 = responses.iter().sum();
            let (score, flag) = qchat_score(&responses);
            assert_eq!(score, expected_score, "score wrong for {responses:?}");
            assert_eq!(flag, u8::from(expected_score > 3), "flag wrong for {responses:?}");
        }
        "all 1024 response vectors scored and flagged correctly".into()
    });
}

#[test]
fn criterion_svc_gradient_check() {
    timed("criterion_svc_gradient_check", Duration::from_secs(10), || {
        let checked = common::grad::check_gradient_instances(2024, 120);
        format!("analytic subgradient matched central differences on {checked} instances")
    });
}

#[test]
fn criterion_tree_matches_exhaustive_oracle() {
    timed("criterion_tree_matches_exhaustive_oracle", Duration::from_secs(30), || {
        let cases = 400;
        let rows = common::oracle::check_oracle_cases(7, cases);
        format!("greedy trainer agreed with the brute-force oracle on {cases} datasets ({rows} rows)")
    });
}

#[test]
fn criterion_federation_identities() {
    timed("criterion_federation_identities", Duration::from_secs(10), || {
        common::identities::check_single_client_identity();
        common::identities::check_full_batch_round_equals_central_step();
        common::identities::check_client_order_invariance();
        "single-client, equal-shard, and permutation identities all hold".into()
    });
}

#[test]
fn criterion_metrics_oracle() {
    timed("criterion_metrics_oracle", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5C0DE);
        for case in 0..1000 {
            let n = rng.random_range(1..=200);
            let predictions: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
            let truth: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();

            let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
            for (&p, &t) in predictions.iter().zip(&truth) {
                match (p, t) {
                    (1, 1) => tp += 1,
                    (1, 0) => fp += 1,
                    (0, 1) => fn_ += 1,
                    _ => tn += 1,
                }
            }

            let cm = confusion(&predictions, &truth).unwrap();
            assert_eq!((cm.tp, cm.fp, cm.r#fn, cm.tn), (tp, fp, fn_, tn), "case {case}");

            let m = metrics(&cm).unwrap();
            let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
            let (tp, fp, fn_, tn) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
            let total = tp + fp + fn_ + tn;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            let f1_positive = ratio(2.0 * precision * recall, precision + recall);
            let precision_neg = ratio(tn, tn + fn_);
            let recall_neg = ratio(tn, tn + fp);
            let f1_negative =
                ratio(2.0 * precision_neg * recall_neg, precision_neg + recall_neg);
            let f1_weighted =
                ((tp + fn_) * f1_positive + (tn + fp) * f1_negative) / total;

            assert_eq!(m.accuracy, (tp + tn) / total, "case {case}: accuracy");
            assert_eq!(m.precision, precision, "case {case}: precision");
            assert_eq!(m.recall, recall, "case {case}: recall");
            assert_eq!(m.f1_positive, f1_positive, "case {case}: f1_positive");
            assert_eq!(m.f1_weighted, f1_weighted, "case {case}: f1_weighted");
        }
        "1000 random prediction/truth pairs matched brute-force counting exactly".into()
    });
}

// ---------------------------------------------------------------------

fn repo_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// The committed reference CSVs must be exactly what the generator
/// produces for seed 42, so the directional claim is reproducible.
fn assert_fixture_provenance(dir: &Path) {
    for (source, expected) in generate_fixture_csvs(42) {
        let path = dir.join(format!("{}.csv", source.as_str()));
        let committed = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
        assert_eq!(committed, expected, "{} drifted from its generator", path.display());
    }
}

fn accuracy_of<'a>(
    reports: &'a [MetricsReport],
    condition: Condition,
    kind: ClassifierKind,
) -> impl Iterator<Item = f64> + 'a {
    reports
        .iter()
        .filter(move |r| r.condition == condition && r.classifier_kind == kind)
        .map(|r| r.metrics.accuracy)
}

#[test]
fn criterion_directional_improvement() {
    timed("criterion_directional_improvement", Duration::from_secs(300), || {
        let fixtures = repo_fixture_dir();
        assert_fixture_provenance(&fixtures);

        let out = TempDir::new().unwrap();
        let mut cfg = RunConfig::with_sources_in(&fixtures);
        cfg.out_dir = out.path().to_path_buf();
        run_ingest(&cfg).unwrap();
        let bundle = run_report(&cfg, MatrixScope::Full).unwrap();

        let mut detail = String::from("on the shared union test split:");
        for kind in ClassifierKind::ALL {
            let federated_condition = match kind {
                ClassifierKind::Svc => Condition::Fedavg,
                _ => Condition::MetaVote,
            };
            let federated = accuracy_of(&bundle.reports, federated_condition, kind)
                .next()
                .unwrap_or_else(|| panic!("no federated report for {kind:?}"));
            let worst_raw = accuracy_of(&bundle.reports, Condition::RawSingleSite, kind)
                .fold(f64::INFINITY, f64::min);
            assert!(
                worst_raw.is_finite(),
                "no single-site reports for {kind:?}"
            );
            assert!(
                federated >= worst_raw + 0.05,
                "{kind:?}: federated accuracy {federated:.4} is not 5 points above the worst \
                 single-site accuracy {worst_raw:.4}"
            );
            if kind == ClassifierKind::Svc {
                assert!(
                    federated >= 0.90,
                    "federated svc accuracy {federated:.4} is below 0.90"
                );
            }
            detail.push_str(&format!(
                " {}: federated {federated:.3} vs worst raw {worst_raw:.3};",
                kind.as_str()
            ));
        }
        detail
    });
}

// ---------------------------------------------------------------------

fn artifact_bytes(cfg: &RunConfig) -> BTreeMap<String, Vec<u8>> {
    run_ingest(cfg).unwrap();
    for id in SourceId::ALL {
        run_train_local(cfg, id).unwrap();
    }
    run_federate(cfg).unwrap();
    run_report(cfg, MatrixScope::Table).unwrap();

    fs::read_dir(&cfg.out_dir)
        .unwrap()
        .map(|entry| {
            let entry = entry.unwrap();
            (entry.file_name().into_string().unwrap(), fs::read(entry.path()).unwrap())
        })
        .collect()
}

#[test]
fn criterion_deterministic_artifacts() {
    timed("criterion_deterministic_artifacts", Duration::from_secs(120), || {
        let fixtures = repo_fixture_dir();
        let out_a = TempDir::new().unwrap();
        let out_b = TempDir::new().unwrap();

        let mut cfg_a = RunConfig::with_sources_in(&fixtures);
        cfg_a.out_dir = out_a.path().to_path_buf();
        cfg_a.n_rounds = 2;
        cfg_a.local_epochs = 10;
        let mut cfg_b = cfg_a.clone();
        cfg_b.out_dir = out_b.path().to_path_buf();

        let run_a = artifact_bytes(&cfg_a);
        let run_b = artifact_bytes(&cfg_b);
        assert_eq!(run_a.len(), 13, "unexpected artifact count: {:?}", run_a.keys());
        assert_eq!(
            run_a.keys().collect::<Vec<_>>(),
            run_b.keys().collect::<Vec<_>>(),
            "artifact sets differ"
        );
        for (name, bytes) in &run_a {
            assert_eq!(
                Some(bytes),
                run_b.get(name),
                "artifact {name} differs between identical runs"
            );
        }
        format!(
            "{} artifacts (models, round log, reports) byte-identical across runs",
            run_a.len()
        )
    });
}

#[test]
fn criterion_wire_round_trip() {
    timed("criterion_wire_round_trip", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
        for case in 0..1000 {
            let envelope =
                Envelope::new(rng.random(), Body::Update(common::gen::random_update(&mut rng)));
            let bytes = encode_message(&envelope);
            let decoded = decode_message(&bytes)
                .unwrap_or_else(|e| panic!("case {case}: decode failed: {e}"));
            assert_eq!(decoded, envelope, "case {case}: value drifted");
            assert_eq!(encode_message(&decoded), bytes, "case {case}: bytes drifted");
        }

        let golden = include_bytes!("data/golden_update.json");
        let pinned = common::gen::golden_envelope();
        assert_eq!(decode_message(golden).unwrap(), pinned, "golden frame decoded differently");
        assert_eq!(encode_message(&pinned).as_slice(), *golden, "golden bytes drifted");
        "1000 random updates round-tripped and the golden frame matched its pinned value".into()
    });
}
