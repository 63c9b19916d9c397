//! Command-line experiment runner.
//!
//! `iscsim <subcommand> --config <path> [--seed S] [--threads T] [--out DIR]
//! [--validate]` — one subcommand per experiment kind. Exit codes: 0 on
//! success, 1 for configuration problems (unreadable/invalid config, kind
//! mismatch, violated invariants), 2 for runtime failures (unwritable
//! output, numerical degeneracy).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use iscsim::config::{ExperimentConfig, ExperimentKind};
use iscsim::errors::Error;
use iscsim::experiments;

#[derive(Parser)]
#[command(name = "iscsim", version, about = "Channel-simulation experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// Rank statistics and code lengths for one-shot channel simulation
    ChannelSim(RunArgs),
    /// Encoder/decoder agreement probability over a (N, L, sigma2) grid
    MatchProb(RunArgs),
    /// Rate-distortion table across feedback modes
    RdCurve(RunArgs),
    /// Feedback protocol bit accounting and rate identity sweep
    FeedbackSweep(RunArgs),
    /// Stratified-race sampler vs sorted-pool baseline comparison
    Mis(RunArgs),
    /// Mismatch bound suite against Monte-Carlo truth
    Bounds(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (one key = value per line)
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 or unset means all available cores
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for CSV artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the config and list every violated invariant without running
    #[arg(long)]
    validate: bool,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::ChannelSim(_) => ExperimentKind::ChannelSim,
            Command::MatchProb(_) => ExperimentKind::MatchProb,
            Command::RdCurve(_) => ExperimentKind::RdCurve,
            Command::FeedbackSweep(_) => ExperimentKind::FeedbackSweep,
            Command::Mis(_) => ExperimentKind::Mis,
            Command::Bounds(_) => ExperimentKind::Bounds,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::ChannelSim(a)
            | Command::MatchProb(a)
            | Command::RdCurve(a)
            | Command::FeedbackSweep(a)
            | Command::Mis(a)
            | Command::Bounds(a) => a,
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is a
            // misconfigured invocation.
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let kind = cli.command.kind();
    let args = cli.command.args();

    let mut cfg = match ExperimentConfig::from_file(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cfg.kind != kind {
        eprintln!(
            "config error: file declares experiment = {}, but the {} subcommand was invoked",
            cfg.kind.name(),
            kind.name()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }

    if args.validate {
        let violations = cfg.violations();
        if violations.is_empty() {
            println!("config ok (hash={:016x})", cfg.hash());
            return ExitCode::SUCCESS;
        }
        for v in &violations {
            eprintln!("config error: {v}");
        }
        return ExitCode::from(EXIT_CONFIG);
    }

    match experiments::run(&cfg) {
        Ok(artifacts) => {
            for file in &artifacts.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
