use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meanfield::config::{read_document, SEED_ENV};
use meanfield::{execute, ExperimentConfig, LabResult, Overrides};

#[derive(Parser)]
#[command(name = "meanfield", version, about = "Mean-field limit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV output plus manifest.json.
    Run {
        /// simulate, wasserstein, dobrushin, rate, hk, chaos, vortex, hierarchy or quantum
        experiment: String,
        /// JSON configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one parameter, e.g. `--param N=64`
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Master seed; takes precedence over the environment and the file
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads for ensemble members
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Check a configuration and print it with every default filled in.
    Validate {
        config: PathBuf,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

fn run(cli: Cli) -> LabResult<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    match cli.command {
        Command::Run { experiment, config, params, seed, output_dir, threads } => {
            let document = match &config {
                Some(path) => read_document(path)?,
                None => serde_json::json!({ "experiment": experiment }),
            };
            let overrides = Overrides { experiment: Some(experiment), seed, env_seed, output_dir, params };
            let resolved = ExperimentConfig::resolve(&document, &overrides)?;
            let record = execute(&resolved, threads)?;
            for e in &record.emitted {
                println!("wrote {} ({} rows)", record.output_dir.join(&e.file_name).display(), e.rows);
            }
            println!("wrote {}", record.output_dir.join(meanfield::MANIFEST_NAME).display());
        }
        Command::Validate { config, params } => {
            let document = read_document(&config)?;
            let overrides = Overrides { env_seed, params, ..Default::default() };
            let resolved = ExperimentConfig::resolve(&document, &overrides)?;
            println!("{}: valid", config.display());
            println!("{}", serde_json::to_string_pretty(&resolved.to_json())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
