//! The raw-vs-federated experiment matrix.
//!
//! All conditions are scored on one shared held-out test set: a
//! stratified slice drawn from the union of the silos before any
//! training, so every cell answers the same question on the same rows.
//! The remaining rows stay partitioned by silo and feed whichever
//! training regime the condition prescribes.

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::dataset::{stratified_split_indices, PreparedDataset, SourceId};
use crate::federation::{
    run_federation, train_local, Aggregation, ClientDataset, RoundConfig,
};

use super::metrics::{confusion, metrics, ConfusionMatrix, Metrics};
use super::EvalError;

/// Default share of the silo union held out for testing.
pub const TEST_FRACTION: f64 = 0.2;
/// Default seed for drawing the shared test split.
pub const SPLIT_SEED: u64 = 42;

/// How the evaluated model was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// Trained on one site's data alone (the merged adult sites by
    /// default, optionally every site separately).
    RawSingleSite,
    /// Sample-weighted parameter averaging across all silos (SVC only).
    Fedavg,
    /// Weighted-majority ensemble of locally trained models.
    MetaVote,
    /// All rows pooled in one place — a privacy-violating upper bound
    /// kept for diagnosis, never deployment.
    PooledDiagnostic,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::RawSingleSite => "raw-single-site",
            Condition::Fedavg => "fedavg",
            Condition::MetaVote => "meta-vote",
            Condition::PooledDiagnostic => "pooled-diagnostic",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (condition, classifier) cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub condition: Condition,
    pub classifier_kind: ClassifierKind,
}

impl ExperimentCell {
    pub fn new(condition: Condition, classifier_kind: ClassifierKind) -> ExperimentCell {
        ExperimentCell { condition, classifier_kind }
    }
}

/// The whole experiment: which cells to run and how to train them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub cells: Vec<ExperimentCell>,
    /// Training configuration shared by every cell (classifier kind and
    /// aggregation are overridden per cell).
    pub base: RoundConfig,
    /// Share of the union held out for the common test set.
    pub test_fraction: f64,
    /// Seed for the test split (independent of training seeds).
    pub split_seed: u64,
    /// Also evaluate each silo's lone raw baseline, not just the merged
    /// adult sites.
    pub per_site_raw: bool,
}

impl ExperimentPlan {
    /// The published comparison: three raw baselines on the adult sites
    /// against a federated model per classifier (averaging for the SVC,
    /// ensembling for the trees).
    pub fn table_matrix(base: RoundConfig) -> ExperimentPlan {
        use ClassifierKind::*;
        use Condition::*;
        ExperimentPlan {
            cells: vec![
                ExperimentCell::new(RawSingleSite, Dt),
                ExperimentCell::new(RawSingleSite, Rf),
                ExperimentCell::new(RawSingleSite, Svc),
                ExperimentCell::new(MetaVote, Dt),
                ExperimentCell::new(MetaVote, Rf),
                ExperimentCell::new(Fedavg, Svc),
            ],
            base,
            test_fraction: TEST_FRACTION,
            split_seed: SPLIT_SEED,
            per_site_raw: false,
        }
    }

    /// Every cell the matrix defines: the table cells plus the SVC
    /// ensemble and the pooled diagnostics.
    pub fn full_matrix(base: RoundConfig) -> ExperimentPlan {
        use ClassifierKind::*;
        use Condition::*;
        let mut plan = ExperimentPlan::table_matrix(base);
        plan.cells.push(ExperimentCell::new(MetaVote, Svc));
        plan.cells.push(ExperimentCell::new(PooledDiagnostic, Dt));
        plan.cells.push(ExperimentCell::new(PooledDiagnostic, Rf));
        plan.cells.push(ExperimentCell::new(PooledDiagnostic, Svc));
        plan
    }
}

/// Everything measured for one trained model on the shared test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub condition: Condition,
    pub classifier_kind: ClassifierKind,
    /// Which site(s) trained the model, for single-site conditions:
    /// a silo id, or "adults" for the merged adult sites.
    pub site: Option<String>,
    /// Number of evaluated records.
    pub n: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
}

/// The union rows split once: per-silo training shares plus the common
/// test set.
struct SplitData {
    train_silos: Vec<ClientDataset>,
    test_features: Vec<Vec<f64>>,
    test_labels: Vec<u8>,
}

fn assemble_split(
    datasets: &[PreparedDataset],
    plan: &ExperimentPlan,
) -> Result<SplitData, EvalError> {
    if datasets.is_empty() {
        return Err(EvalError::Input("no datasets to evaluate".into()));
    }
    let mut ordered: Vec<&PreparedDataset> = datasets.iter().collect();
    ordered.sort_by_key(|d| d.source_id);
    for pair in ordered.windows(2) {
        if pair[0].source_id == pair[1].source_id {
            return Err(EvalError::Input(format!(
                "dataset {} appears twice",
                pair[0].source_id
            )));
        }
    }

    // Union rows in silo-sorted order; remember where each came from.
    let mut owner: Vec<(usize, usize)> = Vec::new();
    let mut union_labels: Vec<u8> = Vec::new();
    for (si, silo) in ordered.iter().enumerate() {
        for (ri, record) in silo.records.iter().enumerate() {
            owner.push((si, ri));
            union_labels.push(record.label);
        }
    }
    let (train_idx, test_idx) =
        stratified_split_indices(&union_labels, plan.test_fraction, plan.split_seed)?;

    let mode = plan.base.feature_mode;
    let mut train_silos: Vec<ClientDataset> = ordered
        .iter()
        .map(|d| ClientDataset {
            client_id: d.source_id,
            features: Vec::new(),
            labels: Vec::new(),
        })
        .collect();
    for &u in &train_idx {
        let (si, ri) = owner[u];
        let record = &ordered[si].records[ri];
        train_silos[si].features.push(record.features(mode));
        train_silos[si].labels.push(record.label);
    }
    let mut test_features = Vec::with_capacity(test_idx.len());
    let mut test_labels = Vec::with_capacity(test_idx.len());
    for &u in &test_idx {
        let (si, ri) = owner[u];
        test_features.push(ordered[si].records[ri].features(mode));
        test_labels.push(ordered[si].records[ri].label);
    }
    Ok(SplitData { train_silos, test_features, test_labels })
}

/// Merge silo training shares row-wise. The carried client id is the
/// lowest merged id; it only anchors the merged model's internal seed.
fn merge_silos(silos: &[&ClientDataset]) -> ClientDataset {
    let mut merged = ClientDataset {
        client_id: silos[0].client_id,
        features: Vec::new(),
        labels: Vec::new(),
    };
    for silo in silos {
        merged.features.extend(silo.features.iter().cloned());
        merged.labels.extend(silo.labels.iter().cloned());
    }
    merged
}

/// Per-cell training configuration: the cell decides kind and
/// aggregation; single-site conditions pick whichever aggregation is
/// legal for the kind (training ignores it, validation does not).
fn cfg_for(cell: &ExperimentCell, base: &RoundConfig) -> RoundConfig {
    let mut cfg = base.clone();
    cfg.classifier_kind = cell.classifier_kind;
    cfg.aggregation = match cell.condition {
        Condition::Fedavg => Aggregation::Fedavg,
        Condition::MetaVote => Aggregation::MetaVote,
        Condition::RawSingleSite | Condition::PooledDiagnostic => {
            if cell.classifier_kind == ClassifierKind::Svc {
                Aggregation::Fedavg
            } else {
                Aggregation::MetaVote
            }
        }
    };
    cfg
}

/// Run every cell of the plan and return one report per evaluated model
/// (raw cells may produce several: the merged adult baseline plus the
/// optional per-site ones).
pub fn run_experiment_matrix(
    datasets: &[PreparedDataset],
    plan: &ExperimentPlan,
) -> Result<Vec<MetricsReport>, EvalError> {
    if plan.cells.is_empty() {
        return Ok(Vec::new());
    }
    let split = assemble_split(datasets, plan)?;
    let mut reports = Vec::new();
    for cell in &plan.cells {
        let cell_reports = evaluate_cell(cell, &split, plan).map_err(|e| EvalError::Cell {
            condition: cell.condition,
            classifier_kind: cell.classifier_kind,
            detail: e.to_string(),
        })?;
        reports.extend(cell_reports);
    }
    Ok(reports)
}

fn evaluate_cell(
    cell: &ExperimentCell,
    split: &SplitData,
    plan: &ExperimentPlan,
) -> Result<Vec<MetricsReport>, EvalError> {
    let cfg = cfg_for(cell, &plan.base);
    match cell.condition {
        Condition::RawSingleSite => {
            let adults: Vec<&ClientDataset> = split
                .train_silos
                .iter()
                .filter(|s| {
                    matches!(s.client_id, SourceId::AdultsUci | SourceId::AdultsKaggle)
                })
                .collect();
            if adults.is_empty() {
                return Err(EvalError::Input(
                    "the single-site baseline needs at least one adult silo".into(),
                ));
            }
            let mut jobs: Vec<(String, ClientDataset)> =
                vec![("adults".to_string(), merge_silos(&adults))];
            if plan.per_site_raw {
                for silo in &split.train_silos {
                    jobs.push((silo.client_id.to_string(), silo.clone()));
                }
            }
            jobs.into_iter()
                .map(|(site, data)| {
                    let outcome = train_local(data, &cfg)?;
                    score(cell, Some(site), split, |row| {
                        outcome.params.predict(row).map_err(EvalError::from)
                    })
                })
                .collect()
        }
        Condition::Fedavg | Condition::MetaVote => {
            let run = run_federation(split.train_silos.clone(), &cfg)?;
            Ok(vec![score(cell, None, split, |row| {
                run.global.predict(row).map_err(EvalError::from)
            })?])
        }
        Condition::PooledDiagnostic => {
            let all: Vec<&ClientDataset> = split.train_silos.iter().collect();
            if all.is_empty() {
                return Err(EvalError::Input("no silos to pool".into()));
            }
            let outcome = train_local(merge_silos(&all), &cfg)?;
            Ok(vec![score(cell, None, split, |row| {
                outcome.params.predict(row).map_err(EvalError::from)
            })?])
        }
    }
}

/// Score one predictor on the shared test set.
fn score(
    cell: &ExperimentCell,
    site: Option<String>,
    split: &SplitData,
    mut predict: impl FnMut(&[f64]) -> Result<u8, EvalError>,
) -> Result<MetricsReport, EvalError> {
    let mut predictions = Vec::with_capacity(split.test_features.len());
    for row in &split.test_features {
        predictions.push(predict(row)?);
    }
    let cm = confusion(&predictions, &split.test_labels)?;
    let m = metrics(&cm)?;
    Ok(MetricsReport {
        condition: cell.condition,
        classifier_kind: cell.classifier_kind,
        site,
        n: cm.total(),
        metrics: m,
        confusion: cm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ScreeningRecord;

    /// Build a silo whose labels follow the questionnaire rule
    /// (score > 3) over deterministic response patterns, with a bias so
    /// silos see different slices of the score range.
    fn silo(id: SourceId, n: usize, low: u8, high: u8) -> PreparedDataset {
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            // 5 is coprime to every range width used below, so scores
            // sweep the whole [low, high] band and both labels appear.
            let score = low + ((i as u8).wrapping_mul(5).wrapping_add(3)) % (high - low + 1);
            let mut responses = [0u8; 10];
            for (j, slot) in responses.iter_mut().enumerate() {
                // Distribute `score` ones across the ten slots, rotated
                // by row so different columns carry the signal.
                *slot = u8::from((j + i) % 10 < usize::from(score));
            }
            let label = u8::from(score > 3);
            records.push(ScreeningRecord { responses, extra: vec![i as f64 % 3.0], label });
        }
        PreparedDataset { source_id: id, extra_names: vec!["age".into()], records }
    }

    fn four_silos() -> Vec<PreparedDataset> {
        vec![
            silo(SourceId::ChildrenUci, 90, 0, 6),
            silo(SourceId::ChildrenKaggle, 80, 2, 8),
            silo(SourceId::AdultsUci, 85, 1, 7),
            silo(SourceId::AdultsKaggle, 95, 3, 10),
        ]
    }

    fn quick_base() -> RoundConfig {
        let mut base =
            RoundConfig { n_rounds: 2, local_epochs_per_round: 10, ..RoundConfig::default() };
        base.svc.epochs = 20;
        base.rf.n_trees = 7;
        base
    }

    #[test]
    fn empty_plan_yields_no_reports() {
        let plan = ExperimentPlan {
            cells: Vec::new(),
            base: quick_base(),
            test_fraction: TEST_FRACTION,
            split_seed: SPLIT_SEED,
            per_site_raw: false,
        };
        assert!(run_experiment_matrix(&four_silos(), &plan).unwrap().is_empty());
    }

    #[test]
    fn table_matrix_produces_one_report_per_cell() {
        let plan = ExperimentPlan::table_matrix(quick_base());
        let reports = run_experiment_matrix(&four_silos(), &plan).unwrap();
        assert_eq!(reports.len(), 6);
        let total_rows: usize = four_silos().iter().map(|d| d.len()).sum();
        for r in &reports {
            assert!(r.n > 0 && (r.n as usize) < total_rows);
            for v in [
                r.metrics.accuracy,
                r.metrics.precision,
                r.metrics.recall,
                r.metrics.f1_positive,
                r.metrics.f1_weighted,
            ] {
                assert!((0.0..=1.0).contains(&v), "metric out of range: {v}");
            }
            assert_eq!(r.confusion.total(), r.n);
        }
        // Every test set is the same rows.
        let ns: Vec<u64> = reports.iter().map(|r| r.n).collect();
        assert!(ns.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(reports[0].site.as_deref(), Some("adults"));
        assert!(reports[5].site.is_none());
        assert_eq!(reports[5].condition, Condition::Fedavg);
    }

    #[test]
    fn per_site_raw_adds_a_report_per_silo() {
        let mut plan = ExperimentPlan::table_matrix(quick_base());
        plan.cells.truncate(1); // raw DT only
        plan.per_site_raw = true;
        let reports = run_experiment_matrix(&four_silos(), &plan).unwrap();
        assert_eq!(reports.len(), 5); // merged adults + four silos
        let sites: Vec<_> = reports.iter().map(|r| r.site.clone().unwrap()).collect();
        assert_eq!(sites[0], "adults");
        assert!(sites.contains(&"children-uci".to_string()));
    }

    #[test]
    fn matrix_runs_are_deterministic() {
        let plan = ExperimentPlan::full_matrix(quick_base());
        let a = run_experiment_matrix(&four_silos(), &plan).unwrap();
        let b = run_experiment_matrix(&four_silos(), &plan).unwrap();
        assert_eq!(
            crate::canonical_json_bytes(&a),
            crate::canonical_json_bytes(&b)
        );
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn duplicate_datasets_are_rejected() {
        let plan = ExperimentPlan::table_matrix(quick_base());
        let mut data = four_silos();
        data.push(silo(SourceId::AdultsUci, 40, 0, 6));
        assert!(matches!(
            run_experiment_matrix(&data, &plan),
            Err(EvalError::Input(_))
        ));
    }

    #[test]
    fn cell_failures_carry_their_coordinates() {
        let mut base = quick_base();
        base.n_rounds = 0; // invalid: caught inside the cell
        let plan = ExperimentPlan::table_matrix(base);
        let err = run_experiment_matrix(&four_silos(), &plan).unwrap_err();
        let EvalError::Cell { condition, classifier_kind, .. } = err else {
            panic!("expected a cell error, got {err}");
        };
        assert_eq!(condition, Condition::RawSingleSite);
        assert_eq!(classifier_kind, ClassifierKind::Dt);
    }
}
