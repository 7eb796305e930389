use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sse_td::config::{parse_config, Method, RunConfig};
use sse_td::pipeline::{run, Command};

/// Invariant, power-series and propagator toolkit for
/// `H(t) = p^4/8 eta^3 + p^2/2 mu + f(t) x`.
#[derive(Parser)]
#[command(name = "sse-td", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML or JSON configuration; omitted keys take the default scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Propagation method, overriding `propagate.method`.
    #[arg(long, value_enum)]
    method: Option<Method>,
}

fn load(cli: &Cli) -> Result<RunConfig, String> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(method) = cli.method {
        config.propagate.method = method;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &config) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
