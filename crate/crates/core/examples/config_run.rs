//! Loads a TOML run configuration, prints its canonical form and runs a command, as the
//! `bdg` binary does.
//!
//! `cargo run --release --example config_run -- configs/reference.toml tc`

use clap::ValueEnum;
use std::path::PathBuf;

use bdg::experiment::{run_experiment, Command, RunConfig, RunPaths};

fn main() -> bdg::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "crates/core/configs/reference.toml".into()));
    let command = args
        .next()
        .and_then(|c| Command::from_str(&c, true).ok())
        .unwrap_or(Command::Tc);
    let config = RunConfig::read(&path)?;
    println!("# sha256 {}\n{}", config.hash(), config.to_canonical());
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let out = std::env::temp_dir().join("bdg-config-run");
    let summary = run_experiment(&config, command, &RunPaths::new(base, &out))?;
    println!("{}", summary.to_json());
    Ok(())
}
