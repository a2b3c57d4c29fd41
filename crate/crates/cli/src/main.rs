//! `fedscreen` — command-line front end for the federated screening
//! pipeline.
//!
//! The CLI is a client of the HTTP service: with `--server` it talks to
//! a running instance, otherwise it spins up an in-process service on
//! an ephemeral loopback port and talks to that. Configuration comes
//! from a flat JSON file (`--config`) whose keys mirror the run
//! configuration; individual flags override file values.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 training
//! failure, 4 missing artifact, 1 anything else.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use fedscreen_client::{ApiClient, ClientError};
use fedscreen_core::api::{
    FederateRequest, IngestRequest, ReportRequest, TrainLocalRequest,
};
use fedscreen_core::canonical_json_string;
use fedscreen_core::classifiers::ClassifierKind;
use fedscreen_core::dataset::{FeatureMode, MissingPolicy, SourceId};
use fedscreen_core::evaluation::{reference_table_rows, render_rows};
use fedscreen_core::federation::Aggregation;
use fedscreen_core::pipeline::{self, MatrixScope, RunConfig};
use fedscreen_core::synthetic::generate_fixture_csvs;

/// Parse one kebab-case enum value through its wire representation, so
/// flags, config files, and the HTTP API all accept the same spelling.
fn parse_kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Parser)]
#[command(name = "fedscreen", version, about = "Federated screening over four tabular silos")]
struct Cli {
    /// URL of a running service; omitted, the command hosts one
    /// in-process on an ephemeral loopback port.
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,

    /// Flat JSON run-configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every stochastic step of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory artifacts are written to and read back from.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// How command results are printed.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Raw CSV for the UCI children silo.
    #[arg(long, global = true, value_name = "PATH")]
    children_uci: Option<PathBuf>,

    /// Raw CSV for the Kaggle children silo.
    #[arg(long, global = true, value_name = "PATH")]
    children_kaggle: Option<PathBuf>,

    /// Raw CSV for the UCI adults silo.
    #[arg(long, global = true, value_name = "PATH")]
    adults_uci: Option<PathBuf>,

    /// Raw CSV for the Kaggle adults silo.
    #[arg(long, global = true, value_name = "PATH")]
    adults_kaggle: Option<PathBuf>,

    /// Classifier family: svc, dt, or rf.
    #[arg(long, global = true, value_parser = parse_kebab::<ClassifierKind>)]
    classifier: Option<ClassifierKind>,

    /// Aggregation rule: fedavg or meta-vote.
    #[arg(long, global = true, value_parser = parse_kebab::<Aggregation>)]
    aggregation: Option<Aggregation>,

    /// Number of federation rounds.
    #[arg(long, global = true)]
    n_rounds: Option<usize>,

    /// Local epochs per round.
    #[arg(long, global = true)]
    local_epochs: Option<usize>,

    /// Missing-cell handling: drop-row or mode-impute.
    #[arg(long, global = true, value_parser = parse_kebab::<MissingPolicy>)]
    missing_policy: Option<MissingPolicy>,

    /// Feature space: responses-only or full.
    #[arg(long, global = true, value_parser = parse_kebab::<FeatureMode>)]
    feature_mode: Option<FeatureMode>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, deduplicate, repair, and encode the configured silos;
    /// write prepared CSVs, the encoding map, and a quality report.
    Ingest,
    /// Train one silo by itself and write its model file.
    TrainLocal {
        /// Which silo to train: children-uci, children-kaggle,
        /// adults-uci, or adults-kaggle.
        #[arg(long, value_parser = parse_kebab::<SourceId>)]
        source: SourceId,
    },
    /// Run the federation; write the global model and round log.
    Federate,
    /// Evaluate raw vs. federated conditions and print the table.
    Report {
        /// Evaluate every condition, including per-site raw baselines
        /// and the pooled diagnostic.
        #[arg(long)]
        full_matrix: bool,
        /// Print the pinned published comparison rows and exit.
        #[arg(long)]
        echo_paper_table: bool,
    },
    /// Run the HTTP service in the foreground.
    Serve {
        /// Address to bind.
        #[arg(long, default_value = "127.0.0.1:8470")]
        addr: String,
    },
    /// Write the four synthetic silo CSVs used as test fixtures.
    GenFixtures {
        /// Directory the CSVs are written into.
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

/// CLI-side failure with its contractual exit code.
enum CliError {
    /// Bad invocation or configuration (exit 2).
    Usage(String),
    /// The service returned an error envelope (exit from its code).
    Service(ClientError),
    /// Local I/O trouble outside the artifact contract (exit 1).
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Service(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Service(e) => u8::try_from(e.exit_code()).unwrap_or(1),
            CliError::Io(_) => 1,
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        CliError::Service(e)
    }
}

/// Merge defaults, the config file, and flag overrides, in that order.
fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let raw = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&raw).map_err(|e| {
                CliError::Usage(format!("invalid config {}: {e}", path.display()))
            })?
        }
        None => RunConfig::default(),
    };
    let sources = [
        (SourceId::ChildrenUci, &cli.children_uci),
        (SourceId::ChildrenKaggle, &cli.children_kaggle),
        (SourceId::AdultsUci, &cli.adults_uci),
        (SourceId::AdultsKaggle, &cli.adults_kaggle),
    ];
    for (id, path) in sources {
        if let Some(path) = path {
            *cfg.source_mut(id) = Some(path.clone());
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(kind) = cli.classifier {
        cfg.classifier_kind = kind;
    }
    if let Some(aggregation) = cli.aggregation {
        cfg.aggregation = aggregation;
    }
    if let Some(n) = cli.n_rounds {
        cfg.n_rounds = n;
    }
    if let Some(n) = cli.local_epochs {
        cfg.local_epochs = n;
    }
    if let Some(policy) = cli.missing_policy {
        cfg.missing_policy = policy;
    }
    if let Some(mode) = cli.feature_mode {
        cfg.feature_mode = mode;
    }
    Ok(cfg)
}

/// The service endpoint to talk to: the given one, or a fresh
/// in-process instance on an ephemeral port.
async fn connect(cli: &Cli) -> Result<ApiClient, CliError> {
    if let Some(url) = &cli.server {
        return Ok(ApiClient::new(url.clone()));
    }
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| CliError::Io(format!("cannot bind loopback service: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Io(format!("cannot resolve loopback address: {e}")))?;
    tokio::spawn(fedscreen_service::serve(listener));
    Ok(ApiClient::new(format!("http://{addr}")))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", canonical_json_string(value));
}

async fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenFixtures { dir } => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            let seed = cli.seed.unwrap_or_else(|| RunConfig::default().seed);
            for (id, csv) in generate_fixture_csvs(seed) {
                let path = dir.join(format!("{}.csv", id.as_str()));
                fs::write(&path, csv)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                println!("wrote {}", path.display());
            }
            return Ok(());
        }
        Command::Serve { addr } => {
            let listener = tokio::net::TcpListener::bind(addr)
                .await
                .map_err(|e| CliError::Io(format!("cannot bind {addr}: {e}")))?;
            let addr = listener
                .local_addr()
                .map_err(|e| CliError::Io(format!("cannot resolve bind address: {e}")))?;
            println!("listening on http://{addr}");
            return fedscreen_service::serve(listener)
                .await
                .map_err(|e| CliError::Io(format!("service stopped: {e}")));
        }
        Command::Report { echo_paper_table: true, .. } => {
            print!("{}", render_rows(&reference_table_rows()));
            return Ok(());
        }
        _ => {}
    }

    let config = resolve_config(&cli)?;
    let client = connect(&cli).await?;

    match cli.command {
        Command::Ingest => {
            let resp = client.ingest(&IngestRequest { config: config.clone() }).await?;
            match cli.format {
                Format::Json => print_json(&resp.report),
                Format::Table => {
                    for q in &resp.report.sources {
                        println!(
                            "{}: kept {}/{} rows ({} duplicates removed, {} rows dropped, {} cells imputed)",
                            q.source, q.rows_kept, q.rows_in, q.duplicates_removed,
                            q.rows_dropped_missing, q.cells_imputed
                        );
                    }
                    println!(
                        "prepared data and quality report written to {}",
                        config.out_dir.display()
                    );
                }
            }
        }
        Command::TrainLocal { source } => {
            let resp = client
                .train_local(&TrainLocalRequest { config: config.clone(), source })
                .await?;
            match cli.format {
                Format::Json => print_json(&resp.outcome),
                Format::Table => println!(
                    "{}: trained on {} rows, validation accuracy {:.4}, model at {}",
                    resp.outcome.client_id,
                    resp.outcome.n_train,
                    resp.outcome.validation_accuracy,
                    pipeline::model_path(&config.out_dir, source).display()
                ),
            }
        }
        Command::Federate => {
            let resp = client.federate(&FederateRequest { config: config.clone() }).await?;
            match cli.format {
                Format::Json => print_json(&resp),
                Format::Table => {
                    for round in &resp.rounds {
                        match round.global_objective {
                            Some(objective) => {
                                println!("round {}: objective {objective:.6}", round.round)
                            }
                            None => println!("round {}: aggregated", round.round),
                        }
                    }
                    println!(
                        "global model at {}, round log at {}",
                        pipeline::global_model_path(&config.out_dir).display(),
                        pipeline::round_log_path(&config.out_dir).display()
                    );
                }
            }
        }
        Command::Report { full_matrix, .. } => {
            let scope = if full_matrix { MatrixScope::Full } else { MatrixScope::Table };
            let resp = client.report(&ReportRequest { config: config.clone(), scope }).await?;
            match cli.format {
                Format::Json => print_json(&resp.reports),
                Format::Table => print!("{}", resp.table),
            }
        }
        Command::GenFixtures { .. } | Command::Serve { .. } => unreachable!("handled above"),
    }
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
