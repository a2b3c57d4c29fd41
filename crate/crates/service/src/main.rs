//! Standalone entry point for the screening service.

use clap::Parser;

#[derive(Parser)]
#[command(name = "fedscreen-service", version, about = "HTTP service for the federated screening pipeline")]
struct Args {
    /// Address to bind, e.g. 127.0.0.1:8470.
    #[arg(long, default_value = "127.0.0.1:8470")]
    addr: String,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt().with_env_filter(
        tracing_subscriber::EnvFilter::try_from_default_env()
            .unwrap_or_else(|_| "info".into()),
    ).init();
    let args = Args::parse();
    let listener = tokio::net::TcpListener::bind(&args.addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    fedscreen_service::serve(listener).await
}
