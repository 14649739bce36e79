use std::process::ExitCode;

use clap::Parser;

use heatframe::cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HEATFRAME_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // fails only if a pool already exists, which cannot happen here
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!(
                    "heatframe: HEATFRAME_THREADS must be a positive integer, got `{threads}`"
                );
                return ExitCode::from(2);
            }
        }
    }
    let config = RunConfig::from_cli(Cli::parse());
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("heatframe: {e}");
            ExitCode::from(2)
        }
    }
}
