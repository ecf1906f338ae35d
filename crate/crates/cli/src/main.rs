use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use witten_lab_cli::config::bad;
use witten_lab_cli::{run_experiment, CheckName, Command, ExperimentConfig, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "witten-lab", version, about = "Harnack and W-entropy experiments for the Witten Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Bakry–Émery curvature, ball-volume comparison and the Bochner identity.
    Curvature(Common),
    /// Heat evolution with snapshots and mass conservation.
    Simulate(Common),
    /// Li–Yau, Hamilton, integrated, sup-bound and kernel time-derivative checks.
    Harnack(Common),
    /// W-entropy series and monotonicity.
    Entropy(Common),
    /// Super Ricci flow margin and entropy along the flow.
    Flow(Common),
    /// Every selected check.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated checks; overrides `checks.select`.
    #[arg(long, value_delimiter = ',')]
    check: Option<Vec<String>>,
    /// Refines every grid axis by this factor.
    #[arg(long, default_value_t = 1)]
    grid_scale: usize,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Curvature(c) => (Command::Curvature, c),
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Harnack(c) => (Command::Harnack, c),
        Sub::Entropy(c) => (Command::Entropy, c),
        Sub::Flow(c) => (Command::Flow, c),
        Sub::All(c) => (Command::All, c),
    };
    match execute(command, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("witten-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command, common: Common) -> Result<bool, RunError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| bad("--config", format!("cannot read {}: {e}", common.config.display())))?;
    let config = ExperimentConfig::from_toml_str(&text)?;
    let checks = match common.check {
        Some(names) => Some(
            names
                .iter()
                .map(|n| n.trim().parse::<CheckName>().map_err(|reason| bad("--check", reason)))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    if common.grid_scale == 0 {
        return Err(bad("--grid-scale", "must be at least 1").into());
    }
    let opts = RunOptions {
        out: common.out,
        checks,
        grid_scale: common.grid_scale,
        seed: common.seed,
    };
    let report = run_experiment(&config, command, &opts)?;
    print!("{}", report.summary);
    println!("output: {}", report.out_dir.display());
    Ok(report.ok())
}
