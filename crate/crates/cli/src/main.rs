use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wpid_cli::{
    cmd_match, cmd_simulate, cmd_sweep, parse_ts_list, CliError, Overrides, RunConfig, StageSelection,
};

/// Identify walking persons by pairing video traces with phone accelerometers.
#[derive(Parser)]
#[command(name = "wpid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic scenario: detections, sensor streams and ground truth.
    Simulate(Common),
    /// Pair traces with sensors frame by frame.
    Match(Common),
    /// Measure the identification rate over a list of TS gates.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pairing stage(s) to report.
    #[arg(long, value_enum)]
    stage: Option<StageSelection>,
    /// Comma-separated TS values in seconds. `match` takes a single value.
    #[arg(long, value_name = "FLOAT,...")]
    ts: Option<String>,
    /// Scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory laid out as `simulate` writes it.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn resolve(common: Common, single_ts: bool) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ts = common.ts.as_deref().map(parse_ts_list).transpose()?;
    if single_ts {
        if let Some(ts) = &ts {
            let [gate] = ts[..] else {
                return Err(CliError::Format { what: "--ts".into(), message: "match takes one TS value".into() });
            };
            config.pipeline.ts_gate = gate;
        }
    }
    config.apply(Overrides { stage: common.stage, ts, seed: common.seed, out: common.out, input: common.input });
    Ok(config)
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(common) => {
            let report = cmd_simulate(&resolve(common, false)?)?;
            println!("{} frames, {} boxes", report.frames, report.boxes);
            for file in report.files {
                println!("{}", file.display());
            }
        }
        Command::Match(common) => {
            let report = cmd_match(&resolve(common, true)?)?;
            println!("{}", serde_json::to_string_pretty(&report.summary).expect("summary serializes"));
            eprintln!("throughput: {:.0} frames/s", report.timing.throughput_fps);
        }
        Command::Sweep(common) => {
            let rows = cmd_sweep(&resolve(common, false)?)?;
            print!("{}", wpid_core::evaluation::sweep_table(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
