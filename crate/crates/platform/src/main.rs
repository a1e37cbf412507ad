use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;
use twin_platform::reproduce::{reproduce, Campaign};
use twin_platform::server::{bind, serve, Platform, Ticker};
use twin_platform::DATA_DIR_ENV;

#[derive(Parser)]
#[command(name = "twin", version, about = "Service-oriented digital twin platform")]
struct Cli {
    /// Directory holding the default scenario and document corpus.
    #[arg(long, env = DATA_DIR_ENV, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the twin's endpoints over HTTP.
    Serve {
        /// Scenario file; defaults to scenario.toml in the data directory.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
        host: IpAddr,
        /// Wall-clock milliseconds between simulation ticks; 0 freezes the
        /// simulated clock.
        #[arg(long, default_value_t = 1000)]
        tick_ms: u64,
        /// Simulated minutes per tick.
        #[arg(long, default_value_t = 1.0)]
        tick_minutes: f64,
    },
    /// Regenerate a case-study campaign and its reports.
    Reproduce {
        /// bhge-mwp, bhge-maintenance or carton.
        campaign: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let data_dir = cli.data_dir.unwrap_or_else(twin_platform::data_dir);
    match cli.command {
        Command::Serve {
            scenario,
            port,
            host,
            tick_ms,
            tick_minutes,
        } => {
            let scenario = scenario.unwrap_or_else(|| data_dir.join("scenario.toml"));
            let platform = Platform::load(&scenario)?;
            platform.warm_up()?;
            let ticker = (tick_ms > 0).then(|| Ticker {
                every: Duration::from_millis(tick_ms),
                minutes: tick_minutes,
            });
            let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
            rt.block_on(async {
                let listener = bind(SocketAddr::new(host, port)).await?;
                tracing::info!("serving {} on http://{}", scenario.display(), listener.local_addr()?);
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                    tracing::info!("shutting down");
                };
                serve(listener, platform, ticker, shutdown).await?;
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce { campaign, seed, out } => {
            let campaign: Campaign = campaign.parse()?;
            let report = reproduce(campaign, seed)?;
            for path in report.write(&out)? {
                println!("wrote {}", path.display());
            }
            print!("{}", report.render_checks());
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
