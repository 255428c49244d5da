use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use bdg::experiment::{run_experiment, Command, RunConfig, RunPaths, RunSummary};
use bdg::BdgError;

/// Time-dependent BdG experiments near the critical temperature.
#[derive(Parser)]
#[command(name = "bdg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn init_threads() -> Result<(), BdgError> {
    let Ok(raw) = std::env::var("BDG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| BdgError::config("BDG_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| BdgError::config("BDG_THREADS", e.to_string()))
}

fn report(s: &RunSummary) {
    if let Some(t_c) = s.t_c {
        println!("T_c = {t_c:.12}");
    }
    if let Some(t) = s.temperature {
        println!("T = {t:.12}");
    }
    if let (Some(re), Some(im)) = (s.lambda_re, s.lambda_im) {
        println!("lambda = {re:.6e} {im:+.6e}i");
    }
    if let Some(d) = s.max_abs_psi_sq_deviation {
        println!("max ||psi|^2 - |psi_0|^2| = {d:.6e}");
    }
    if let Some(f) = &s.fitted_decay_rate {
        println!("fitted rate = {:.6e} (max log residual {:.2e})", -f.slope, f.max_log_residual);
    }
    for nf in &s.scaling_exponents {
        println!("{} exponent = {:.4} (max log residual {:.2e})", nf.name, nf.fit.slope, nf.fit.max_log_residual);
    }
    for (k, v) in &s.extra {
        println!("{k} = {v:.10e}");
    }
    for n in &s.notes {
        println!("note: {n}");
    }
    for v in &s.violations {
        eprintln!("violation: {v}");
    }
    println!("wall time = {:.2} s", s.wall_time_s);
}

fn run(cli: &Cli) -> Result<RunSummary, BdgError> {
    init_threads()?;
    let config = RunConfig::read(&cli.config)?;
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    run_experiment(&config, cli.command, &RunPaths::new(base, &cli.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            report(&summary);
            if summary.invariants_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("invariant check failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
