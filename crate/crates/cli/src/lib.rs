//! Command-line front end: config parsing, presets, sweeps and report files.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{Context, EXIT_CONFIG};
use config::Config;
use output::{OutDir, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "kdvb",
    version,
    about = "Pseudospectral experiments for damped generalized KdV-Burgers equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML file, or `preset:NAME` for a built-in configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<String>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,

    /// Seed for random initial data; overrides `ic.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run one trajectory and write its energy ledger and snapshots.
    Simulate,
    /// Fit decay rates over a grid of parameters.
    DecaySweep,
    /// Check the growth condition and the damping hypotheses.
    HypCheck,
    /// Scan Carleman coefficient positivity and evaluate the weighted inequality.
    CarlemanVerify,
    /// Run the Picard iteration on a short time slab.
    PicardDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::DecaySweep => "decay-sweep",
            Self::HypCheck => "hyp-check",
            Self::CarlemanVerify => "carleman-verify",
            Self::PicardDemo => "picard-demo",
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Runs one subcommand and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let started = now();
    let config = match &cli.config {
        Some(spec) => Config::load(spec),
        None => Ok(Config::default()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out_dir = match &cli.out {
        Some(p) => p.clone(),
        None => match config.output_dir() {
            Ok(d) => PathBuf::from(d),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
    };
    let mut out = match OutDir::create(&out_dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", out_dir.display());
            return EXIT_CONFIG;
        }
    };
    let ctx = Context {
        config: &config,
        out: &mut out,
        seed: cli.seed,
        workers: cli.workers as usize,
    };
    let result = match cli.command {
        Command::Simulate => commands::simulate_cmd(ctx),
        Command::DecaySweep => commands::decay_sweep_cmd(ctx),
        Command::HypCheck => commands::hyp_check_cmd(ctx),
        Command::CarlemanVerify => commands::carleman_verify_cmd(ctx),
        Command::PicardDemo => commands::picard_demo_cmd(ctx),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_path: config.source.clone(),
        output_dir: out_dir.display().to_string(),
        seed: cli.seed,
        started,
        finished: now(),
        exit_code: code,
        artifacts: Vec::new(),
    };
    if let Err(e) = out.finish(manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_CONFIG;
    }
    code
}
