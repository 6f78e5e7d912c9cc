use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use d2d_lab::summary::{render, summarize_dir};
use d2d_lab::{run_experiment, Experiment, LabConfig, LabError};

#[derive(Parser)]
#[command(name = "d2dlab", version, about = "Run D2D scheduling experiments and summarize their CSV output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected throughput, head probabilities and energy per cluster scheduler
    Analytics(RunArgs),
    /// Frame-level simulation of the configured schedulers
    Simulate(RunArgs),
    /// Tie-breaking weights on random connection sets
    Tiebreak(RunArgs),
    /// Mode selection on random D2D scenarios
    Modeselect(RunArgs),
    /// Repeat a pipeline over one swept parameter
    Sweep(RunArgs),
    /// Print means, intervals and Jain indexes of a results directory
    Summary {
        /// Results directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    frames: Option<u64>,
    /// Record a per-frame trace of the first replication
    #[arg(long)]
    trace: bool,
}

fn load(a: &RunArgs) -> Result<LabConfig, LabError> {
    let mut cfg = match &a.config {
        Some(p) => LabConfig::load(p)?,
        None => LabConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = a.replications {
        cfg.run.replications = r;
    }
    if let Some(f) = a.frames {
        cfg.run.frames = f;
    }
    cfg.run.trace |= a.trace;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Summary { out } => summarize_dir(&out).map(|rows| print!("{}", render(&rows))),
        Command::Analytics(a) => go(Experiment::Analytics, &a),
        Command::Simulate(a) => go(Experiment::Simulate, &a),
        Command::Tiebreak(a) => go(Experiment::Tiebreak, &a),
        Command::Modeselect(a) => go(Experiment::Modeselect, &a),
        Command::Sweep(a) => go(Experiment::Sweep, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if matches!(e, LabError::NoData(_)) {
                eprintln!("no data");
            }
            eprintln!("d2dlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn go(exp: Experiment, a: &RunArgs) -> Result<(), LabError> {
    let cfg = load(a)?;
    for p in run_experiment(exp, &cfg, &a.out)? {
        println!("{}", p.display());
    }
    Ok(())
}
