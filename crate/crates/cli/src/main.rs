use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sbp_cli::config::validate_grid;
use sbp_cli::{exit_code, parse_config, run, RunError};

/// Multipeak cluster solutions of the Schrödinger–Bopp–Podolsky system.
#[derive(Parser, Debug)]
#[command(name = "sbp", version)]
struct Args {
    /// Run configuration (flat `key = value` file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Parallel evaluations; overrides `workers`.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long = "grid-L")]
    grid_l: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn execute(args: Args) -> Result<i32, RunError> {
    let mut cfg = parse_config(&args.config)?;
    if let Some(o) = args.output {
        cfg.output_dir = o;
    }
    if let Some(w) = args.workers {
        cfg.workers = w.max(1);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.grid_n.is_some() || args.grid_l.is_some() {
        let (l0, n0) = cfg.grid.unzip();
        let l = args.grid_l.or(l0);
        let n = args.grid_n.or(n0);
        cfg.grid = match (l, n) {
            (Some(l), Some(n)) => Some(validate_grid(l, n)?),
            _ => {
                return Err(sbp_cli::ConfigError::Validation {
                    key: "grid_n".into(),
                    constraint: "given together with grid_L".into(),
                }
                .into())
            }
        };
    }
    let report = run(&cfg)?;
    for (eps, e) in &report.failures {
        eprintln!("eps = {eps}: {e}");
    }
    if !report.truncated.is_empty() {
        eprintln!("grid budget exceeded, skipped eps = {:?}", report.truncated);
    }
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(report.exit_code())
}
