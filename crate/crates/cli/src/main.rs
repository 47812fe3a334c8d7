use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use obsharvest::config::{self, Mode};
use obsharvest::run::{execute, output_dir, Failure, RunOptions};

#[derive(Parser)]
#[command(name = "obsharvest", version, about = "Observation and harvesting policies under random observations")]
struct Cli {
    /// Run configuration (.toml, or .json for the JSON mirror).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only errors on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Run,
    /// Solve the flexible (or inflexible) optimality system.
    Solve {
        #[arg(long)]
        inflexible: bool,
    },
    /// Solve both systems and write the value of information.
    Voi,
    /// Monte Carlo evaluation of a policy.
    Simulate,
    /// Estimate a regime chain from a discharge record.
    EstimateChain,
    /// Compare the grid solver with the exact two-regime solution.
    OracleCheck,
    /// Repeat a solve or VOI run over one model parameter.
    Sweep,
    /// Print the reference configuration.
    DefaultConfig {
        /// Emit the JSON mirror instead of TOML.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Failure> {
    let mode = match &cli.command {
        Command::DefaultConfig { json } => {
            let cfg = config::default_config();
            if *json {
                println!("{}", to_json(&cfg.to_toml()));
            } else {
                print!("{}", cfg.to_toml());
            }
            return Ok(());
        }
        Command::Run => None,
        Command::Solve { inflexible: true } => Some(Mode::SolveInflexible),
        Command::Solve { inflexible: false } => Some(Mode::SolveFlexible),
        Command::Voi => Some(Mode::Voi),
        Command::Simulate => Some(Mode::Simulate),
        Command::EstimateChain => Some(Mode::EstimateChain),
        Command::OracleCheck => Some(Mode::OracleCheck),
        Command::Sweep => Some(Mode::Sweep),
    };
    let path = cli
        .config
        .ok_or_else(|| Failure::Validation(anyhow::anyhow!("--config PATH is required")))?;
    let mut cfg = config::load(&path).map_err(|e| Failure::Validation(e.into()))?;
    if let Some(m) = mode {
        cfg.mode = m;
        cfg.check_mode_sections()
            .map_err(|e| Failure::Validation(e.into()))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(e.into()))?;
    }
    let opts = RunOptions {
        out: output_dir(cli.out.as_deref(), &cfg),
        quiet: cli.quiet,
    };
    execute(&cfg, &opts).map(|_| ())
}

/// Flat TOML lines to a flat JSON object with dotted keys.
fn to_json(toml_text: &str) -> String {
    let table: toml::Table = toml_text.parse().expect("canonical config is valid TOML");
    let mut flat = serde_json::Map::new();
    flatten("", &toml::Value::Table(table), &mut flat);
    serde_json::to_string_pretty(&flat).expect("serializable")
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut serde_json::Map<String, serde_json::Value>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(
                prefix.to_string(),
                serde_json::to_value(other).expect("toml values map onto JSON"),
            );
        }
    }
}
