use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use underlay_relay::experiment::{load_config, run, Mode, Outcome};
use underlay_relay::Error;

/// Outage and throughput sweeps for max-min relay selection in underlay
/// cognitive radio.
#[derive(Parser, Debug)]
#[command(name = "relaysim", version)]
struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured mode: outage, throughput, pk or validate.
    #[arg(long)]
    mode: Option<Mode>,
    /// Override Monte-Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when neither this nor the config names one.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the validated configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Cancellation { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.output.is_some() {
        cfg.output = args.output;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if args.dump_config {
        println!("{}", cfg.to_json());
        return ExitCode::SUCCESS;
    }
    match run(&cfg) {
        Ok(Outcome::Csv { text, path: None }) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Csv { path: Some(p), .. }) => {
            eprintln!("wrote {}", p.display());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Report(r)) => {
            print!("{r}");
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
