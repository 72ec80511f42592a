use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use infbilap::cli::{self, Command, EXIT_CONFIG, EXIT_IO};

/// First eigenpairs of the p-Bilaplacian and p → ∞ experiments.
#[derive(Parser, Debug)]
#[command(name = "infbilap", version)]
struct Args {
    /// solve, continuation, faber-krahn, oracle, convergence or plot
    command: String,
    /// Configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(command) = Command::from_name(&args.command) else {
        eprintln!("error: unknown command {:?}", args.command);
        return ExitCode::from(EXIT_CONFIG as u8);
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    let result = cli::parse_config_for(&text, Some(command)).and_then(|cfg| {
        let out = cli::output_dir(args.out.clone(), &cfg);
        cli::run(&cfg, &out).map(|s| (out, s))
    });
    match result {
        Ok((out, summary)) => {
            for f in summary.files {
                println!("{}", out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
