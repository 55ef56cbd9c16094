use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use fade_core::cli::{cmd_gap, cmd_profile, cmd_rates, cmd_simulate, cmd_verify, CommandOutput};
use fade_core::config::ExperimentConfig;
use fade_core::FadeError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Profile,
    Gap,
    Simulate,
    Rates,
    Verify,
}

/// Fast-diffusion asymptotics experiments.
#[derive(Debug, Parser)]
#[command(name = "fade", version)]
struct Args {
    command: Command,
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Print the canonical configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

fn run(args: Args) -> Result<bool, FadeError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.dump_config {
        print!("{}", cfg.dump());
        return Ok(true);
    }
    let output: CommandOutput = match args.command {
        Command::Profile => cmd_profile(&cfg)?,
        Command::Gap => cmd_gap(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Rates => cmd_rates(&cfg)?,
        Command::Verify => cmd_verify(&cfg)?,
    };
    std::fs::create_dir_all(&cfg.out)?;
    for (name, contents) in &output.files {
        let path = cfg.out.join(name);
        std::fs::write(&path, contents)?;
        println!("wrote {}", path.display());
    }
    println!("{}", output.summary);
    Ok(output.passed)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("fade: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
