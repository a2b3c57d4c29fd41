//! File-level orchestration: ingest → train/federate → report.
//!
//! Both the CLI and the HTTP service drive these functions; they own
//! the artifact layout under `out_dir` and the error taxonomy that maps
//! onto exit codes and HTTP statuses. Every artifact is written as
//! canonical JSON (or canonical CSV), so a rerun with the same
//! [`RunConfig`] produces byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical_json_bytes;
use crate::classifiers::{ClassifierError, ClassifierKind};
use crate::dataset::{
    deduplicate_counted, handle_missing_counted, label_encode_union, parse_csv, parse_csv_encoded,
    serialize_csv, Dataset, DatasetError, FeatureMode, MissingPolicy, PreparedDataset, Schema,
    SourceId,
};
use crate::evaluation::{
    render_json, render_table, run_experiment_matrix, EvalError, ExperimentPlan, MetricsReport,
};
use crate::federation::{
    run_federation, train_local, Aggregation, ClientDataset, FederationError, FederationRun,
    LocalTrainOutcome, RoundConfig,
};

/// One run's declarative configuration. Serialized as flat JSON; the
/// CLI reads it from `--config` and lets flags override single keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct RunConfig {
    /// Raw CSV per silo; absent silos sit out the run.
    pub children_uci: Option<PathBuf>,
    pub children_kaggle: Option<PathBuf>,
    pub adults_uci: Option<PathBuf>,
    pub adults_kaggle: Option<PathBuf>,
    pub missing_policy: MissingPolicy,
    pub feature_mode: FeatureMode,
    pub classifier_kind: ClassifierKind,
    pub aggregation: Aggregation,
    pub n_rounds: usize,
    pub local_epochs: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = RoundConfig::default();
        RunConfig {
            children_uci: None,
            children_kaggle: None,
            adults_uci: None,
            adults_kaggle: None,
            missing_policy: MissingPolicy::default(),
            feature_mode: FeatureMode::default(),
            classifier_kind: base.classifier_kind,
            aggregation: base.aggregation,
            n_rounds: base.n_rounds,
            local_epochs: base.local_epochs_per_round,
            seed: base.seed,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// A config with every silo pointed at `<dir>/<source-id>.csv`.
    pub fn with_sources_in(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::default();
        for id in SourceId::ALL {
            *cfg.source_mut(id) = Some(dir.join(format!("{}.csv", id.as_str())));
        }
        cfg
    }

    pub fn source(&self, id: SourceId) -> Option<&Path> {
        match id {
            SourceId::ChildrenUci => self.children_uci.as_deref(),
            SourceId::ChildrenKaggle => self.children_kaggle.as_deref(),
            SourceId::AdultsUci => self.adults_uci.as_deref(),
            SourceId::AdultsKaggle => self.adults_kaggle.as_deref(),
        }
    }

    pub fn source_mut(&mut self, id: SourceId) -> &mut Option<PathBuf> {
        match id {
            SourceId::ChildrenUci => &mut self.children_uci,
            SourceId::ChildrenKaggle => &mut self.children_kaggle,
            SourceId::AdultsUci => &mut self.adults_uci,
            SourceId::AdultsKaggle => &mut self.adults_kaggle,
        }
    }

    /// Participating silos in canonical order.
    pub fn sources(&self) -> Vec<(SourceId, &Path)> {
        SourceId::ALL
            .iter()
            .filter_map(|&id| self.source(id).map(|p| (id, p)))
            .collect()
    }

    /// The federation round configuration this run denotes.
    pub fn round_config(&self) -> RoundConfig {
        RoundConfig {
            classifier_kind: self.classifier_kind,
            aggregation: self.aggregation,
            n_rounds: self.n_rounds,
            local_epochs_per_round: self.local_epochs,
            seed: self.seed,
            feature_mode: self.feature_mode,
            ..RoundConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.sources().is_empty() {
            return Err(PipelineError::Config(
                "at least one source file must be configured".into(),
            ));
        }
        self.round_config().validate().map_err(|e| PipelineError::Config(e.to_string()))
    }
}

/// Per-silo counters from one ingest pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceQuality {
    pub source: SourceId,
    pub path: String,
    pub rows_in: usize,
    pub rows_kept: usize,
    pub duplicates_removed: usize,
    pub rows_dropped_missing: usize,
    pub cells_imputed: usize,
    pub missing_per_column: BTreeMap<String, usize>,
}

/// The data-quality report `ingest` writes next to the prepared files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub missing_policy: MissingPolicy,
    pub sources: Vec<SourceQuality>,
}

/// Which slice of the experiment matrix a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixScope {
    /// The six headline cells: raw single-site rows plus one federated
    /// row per classifier.
    #[default]
    Table,
    /// Every condition, including per-site raw baselines and the pooled
    /// diagnostic.
    Full,
}

/// Rendered evaluation output plus the raw reports behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub reports: Vec<MetricsReport>,
    pub table: String,
}

/// Errors from pipeline commands, classified for the exit-code and
/// HTTP-status contracts: config 2/400, data 2/422, training 3/422,
/// artifact 4/404, internal 1/500.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("artifact error: {0}")]
    Artifact(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<DatasetError> for PipelineError {
    fn from(e: DatasetError) -> Self {
        PipelineError::Data(e.to_string())
    }
}

impl From<ClassifierError> for PipelineError {
    fn from(e: ClassifierError) -> Self {
        PipelineError::Training(e.to_string())
    }
}

impl From<FederationError> for PipelineError {
    fn from(e: FederationError) -> Self {
        match e {
            FederationError::Config(m) => PipelineError::Config(m),
            FederationError::EmptyRound(m) => PipelineError::Config(m),
            FederationError::SchemaMismatch(m) => PipelineError::Data(m),
            FederationError::Dataset(d) => d.into(),
            FederationError::Classifier(c) => c.into(),
            e @ FederationError::Client { .. } => PipelineError::Training(e.to_string()),
            e @ (FederationError::Protocol(_) | FederationError::Transport(_)) => {
                PipelineError::Internal(e.to_string())
            }
        }
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Shape(m) | EvalError::Empty(m) | EvalError::Input(m) | EvalError::Parse(m) => {
                PipelineError::Data(m)
            }
            e @ EvalError::Cell { .. } => PipelineError::Training(e.to_string()),
            EvalError::Dataset(d) => d.into(),
            EvalError::Federation(f) => f.into(),
            EvalError::Classifier(c) => c.into(),
        }
    }
}

/// `<out_dir>/prepared_<source>.csv` — cleaned, encoded silo data.
pub fn prepared_path(out_dir: &Path, id: SourceId) -> PathBuf {
    out_dir.join(format!("prepared_{}.csv", id.as_str()))
}

/// `<out_dir>/encoding_map.json` — shared categorical code space.
pub fn encoding_map_path(out_dir: &Path) -> PathBuf {
    out_dir.join("encoding_map.json")
}

/// `<out_dir>/ingest_report.json` — per-silo data-quality counters.
pub fn ingest_report_path(out_dir: &Path) -> PathBuf {
    out_dir.join("ingest_report.json")
}

/// `<out_dir>/model_<source>.json` — one silo's locally trained model.
pub fn model_path(out_dir: &Path, id: SourceId) -> PathBuf {
    out_dir.join(format!("model_{}.json", id.as_str()))
}

/// `<out_dir>/global_model.json` — the federated model.
pub fn global_model_path(out_dir: &Path) -> PathBuf {
    out_dir.join("global_model.json")
}

/// `<out_dir>/round_log.jsonl` — one JSON round log per line.
pub fn round_log_path(out_dir: &Path) -> PathBuf {
    out_dir.join("round_log.jsonl")
}

/// `<out_dir>/report.json` — the experiment-matrix metrics reports.
pub fn report_path(out_dir: &Path) -> PathBuf {
    out_dir.join("report.json")
}

/// Parse, deduplicate, repair, and encode every configured silo, then
/// write the prepared CSVs, the shared encoding map, and a quality
/// report. Categorical codes come from the union of all silos, so the
/// prepared files share one feature space.
pub fn run_ingest(cfg: &RunConfig) -> Result<IngestReport, PipelineError> {
    cfg.validate()?;
    let schema = Schema::asd_screening();

    let mut cleaned: Vec<Dataset> = Vec::new();
    let mut qualities: Vec<SourceQuality> = Vec::new();
    for (id, path) in cfg.sources() {
        let raw = fs::read_to_string(path).map_err(|e| {
            PipelineError::Data(format!("cannot read {}: {e}", path.display()))
        })?;
        let dataset = parse_csv(&raw, &schema, id)
            .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        let rows_in = dataset.len();
        let (deduped, duplicates_removed) = deduplicate_counted(&dataset);
        let (repaired, stats) = handle_missing_counted(&deduped, cfg.missing_policy)?;
        qualities.push(SourceQuality {
            source: id,
            path: path.display().to_string(),
            rows_in,
            rows_kept: repaired.len(),
            duplicates_removed,
            rows_dropped_missing: stats.rows_dropped,
            cells_imputed: stats.cells_imputed,
            missing_per_column: stats.missing_per_column,
        });
        cleaned.push(repaired);
    }

    let (encoded, map) = label_encode_union(&cleaned)?;

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::Internal(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    for dataset in &encoded {
        write_bytes(
            &prepared_path(&cfg.out_dir, dataset.source_id()),
            serialize_csv(dataset).as_bytes(),
        )?;
    }
    write_json(&encoding_map_path(&cfg.out_dir), &map)?;
    let report = IngestReport { missing_policy: cfg.missing_policy, sources: qualities };
    write_json(&ingest_report_path(&cfg.out_dir), &report)?;
    Ok(report)
}

/// Read one silo's prepared file back. Missing file means `ingest` has
/// not run — an artifact error, pointing at the path it wanted.
fn load_prepared_one(cfg: &RunConfig, id: SourceId) -> Result<PreparedDataset, PipelineError> {
    let path = prepared_path(&cfg.out_dir, id);
    let raw = fs::read_to_string(&path).map_err(|e| {
        PipelineError::Artifact(format!("cannot read prepared data {}: {e}", path.display()))
    })?;
    let schema = Schema::asd_screening();
    let dataset = parse_csv_encoded(&raw, &schema, id)
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    Ok(dataset.to_prepared()?)
}

/// Prepared data for every configured silo, in canonical order.
pub fn load_prepared(cfg: &RunConfig) -> Result<Vec<PreparedDataset>, PipelineError> {
    cfg.sources().iter().map(|&(id, _)| load_prepared_one(cfg, id)).collect()
}

/// Train one silo by itself and write `model_<source>.json`.
pub fn run_train_local(cfg: &RunConfig, id: SourceId) -> Result<LocalTrainOutcome, PipelineError> {
    cfg.validate()?;
    if cfg.source(id).is_none() {
        return Err(PipelineError::Config(format!(
            "source {id} is not part of this run configuration"
        )));
    }
    let prepared = load_prepared_one(cfg, id)?;
    let data = ClientDataset::from_prepared(&prepared, cfg.feature_mode);
    let outcome = train_local(data, &cfg.round_config())?;
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::Internal(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    write_json(&model_path(&cfg.out_dir, id), &outcome)?;
    Ok(outcome)
}

/// Run the federation over every configured silo and write the global
/// model plus the per-round log.
pub fn run_federate(cfg: &RunConfig) -> Result<FederationRun, PipelineError> {
    cfg.validate()?;
    let silos = load_prepared(cfg)?;
    let clients: Vec<ClientDataset> =
        silos.iter().map(|p| ClientDataset::from_prepared(p, cfg.feature_mode)).collect();
    let run = run_federation(clients, &cfg.round_config())?;

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::Internal(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    write_json(&global_model_path(&cfg.out_dir), &run.global)?;
    let mut log = Vec::new();
    for round in &run.rounds {
        log.extend_from_slice(&canonical_json_bytes(round));
        log.push(b'\n');
    }
    write_bytes(&round_log_path(&cfg.out_dir), &log)?;
    Ok(run)
}

/// Evaluate the experiment matrix on the prepared silos and write
/// `report.json`. Returns the reports plus the rendered text table.
pub fn run_report(cfg: &RunConfig, scope: MatrixScope) -> Result<ReportBundle, PipelineError> {
    cfg.validate()?;
    let silos = load_prepared(cfg)?;
    let base = cfg.round_config();
    let plan = match scope {
        MatrixScope::Table => ExperimentPlan::table_matrix(base),
        MatrixScope::Full => {
            let mut plan = ExperimentPlan::full_matrix(base);
            plan.per_site_raw = true;
            plan
        }
    };
    let reports = run_experiment_matrix(&silos, &plan)?;
    let table = render_table(&reports);

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| PipelineError::Internal(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let mut json = render_json(&reports);
    json.push(b'\n');
    write_bytes(&report_path(&cfg.out_dir), &json)?;
    Ok(ReportBundle { reports, table })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, bytes)
        .map_err(|e| PipelineError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut bytes = canonical_json_bytes(value);
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}
