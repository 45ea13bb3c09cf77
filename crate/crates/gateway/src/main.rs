use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use rover_gateway::{decode_trace, headless, serve, simulate, LiveSession};

#[derive(Parser)]
#[command(name = "rover", version, about = "Gesture-controlled rescue rover simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario against a gesture trace as fast as possible.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Serve the live simulation over WebSocket at 20 ticks per second.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        port: u16,
        /// Directory for per-run event logs and metrics.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Print the drive command transitions a trace produces.
    DecodeTrace { trace: PathBuf },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("ROVER_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Simulate { scenario, trace, out, seed } => match simulate(&scenario, &trace, &out, seed) {
            Ok(output) => {
                println!("{}", output.summary);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::DecodeTrace { trace } => match decode_trace(&trace) {
            Ok(lines) => {
                for line in lines {
                    println!("{line}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Serve { scenario, port, out } => match run_service(scenario, port, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(code) => code,
        },
    }
}

fn run_service(scenario_path: PathBuf, port: u16, out: PathBuf) -> Result<(), ExitCode> {
    let scenario = headless::read_scenario(&scenario_path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code() as u8)
    })?;
    let dir = scenario_path.parent().map(PathBuf::from).unwrap_or_default();
    let session = LiveSession::new(scenario, dir).with_persistence(out).map_err(|e| {
        eprintln!("error: cannot create run directory: {e}");
        ExitCode::FAILURE
    })?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await.map_err(|e| {
            eprintln!("error: cannot bind port {port}: {e}");
            ExitCode::FAILURE
        })?;
        tracing::info!(port, "serving");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve(listener, session, shutdown).await.map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        })?;
        Ok(())
    })
}
