//! Command-line front end. See `thermowave --help`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thermowave::cli::{run, Mode, RunConfig};
use thermowave::Error;

#[derive(Parser, Debug)]
#[command(name = "thermowave", version, about = "Symbols, linear inversion and traveling waves for a heat-conducting free-surface layer")]
struct Args {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// symbols | asym-check | linear-solve | nonlinear-solve | roundtrip-test | norms
    #[arg(long)]
    mode: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for per-frequency parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized modes.
    #[arg(long)]
    seed: Option<u64>,
}

fn resolve(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e @ (Error::Config(_) | Error::InvalidParams(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
