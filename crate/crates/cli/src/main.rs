use std::process::ExitCode;

use clap::Parser;
use mmlimits_cli::args::{Cli, Command};
use mmlimits_cli::{execute, write_artifact, CliError, ExperimentManifest};

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let manifest = match &cli.command {
        Command::Run { manifest } => {
            let text = std::fs::read_to_string(manifest)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", manifest.display())))?;
            ExperimentManifest::from_json(&text)?
        }
        other => other.manifest()?.expect("not a run command"),
    };
    let artifact = execute(&manifest)?;
    write_artifact(&artifact, &manifest)?;
    match artifact.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmlimits: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
