use clap::Parser;
use cqms_cli::{parse_config, run_job};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one cqms job described by a configuration file.
#[derive(Parser)]
#[command(name = "cqms", version)]
struct Args {
    /// Job configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the configured output or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel parts.
    #[arg(long)]
    jobs: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: invalid configuration", args.config.display());
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let outcome = match run_job(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = outcome.write(&out) {
        eprintln!("error: cannot write to {}: {e}", out.display());
        return ExitCode::from(2);
    }
    print!("{}", outcome.summary);
    ExitCode::from(outcome.exit_code(args.strict) as u8)
}
