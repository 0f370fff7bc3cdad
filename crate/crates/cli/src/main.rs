use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frontsys_cli::commands;
use frontsys_cli::config::Config;

#[derive(Parser)]
#[command(name = "frontsys", about = "Free-boundary parabolic system solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "./out")]
    out: PathBuf,

    /// Worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One run: front.csv, snapshots.csv, verdict.json
    Simulate,
    /// Regime map over (p, q, amplitude)
    Sweep,
    /// Shifted cascade for sublinear exponents
    Cascade,
    /// Property suite over the built-in problems
    Verify,
    /// Manufactured-solution convergence ladder
    Mms,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(1);
    };
    let config = match Config::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Simulate => commands::simulate_cmd(&config, &cli.out),
        Command::Sweep => commands::sweep_cmd(&config, &cli.out),
        Command::Cascade => commands::cascade_cmd(&config, &cli.out),
        Command::Verify => commands::verify_cmd(&config, &cli.out),
        Command::Mms => commands::mms_cmd(&config, &cli.out),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
