use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use locbound::cli::{self, Mode, RunOptions};

/// Localization bounds for sensors scattered as a Poisson field.
#[derive(Debug, Parser)]
#[command(name = "locbound", version)]
struct Args {
    /// bounds | avg-crb | ml-sim | verify
    mode: Mode,
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; defaults to the config's `output` or `<mode>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let opts = RunOptions {
        seed: args.seed,
        out: args.out,
        workers: Some(args.workers),
    };
    let result = cli::load_config(&args.config).and_then(|cfg| {
        if let Some(m) = cfg.mode.filter(|m| *m != args.mode) {
            eprintln!("note: command-line mode {} overrides config mode {}", args.mode.name(), m.name());
        }
        cli::run(cfg, args.mode, &opts)
    });
    match result {
        Ok(report) => {
            print!("{}", report.stdout);
            if !report.stderr.is_empty() {
                eprintln!("{}", report.stderr);
            }
            println!("wrote {}", report.csv_path.display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
