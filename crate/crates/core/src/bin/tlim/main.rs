//! `tlim` command line: simulate, estimate, screen, report.

mod common;
mod estimate;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use common::CliError;

#[derive(Parser, Debug)]
#[command(name = "tlim", version, about = "Estimate all-order interactions from discrete samples")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// TOML file with defaults for the subcommand's flags (same names, without dashes)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset from a lattice Hamiltonian or a trait model
    Simulate(SimulateArgs),
    /// Estimate interactions for a batch of tuples
    Estimate(EstimateArgs),
    /// χ² screen pairs for (conditional) independence
    Screen(ScreenArgs),
    /// Turn estimate/screen outputs and datasets into tidy CSVs
    Report(ReportArgs),
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// ising | plaquette | trait
    #[arg(long)]
    pub model: Option<String>,
    /// Lattice side
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub side: Option<usize>,
    /// Temperature
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub temperature: Option<f64>,
    /// Coupling (Ising default 0.5, so the estimated coupling is 1/(2T))
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub coupling: Option<f64>,
    /// Number of samples (or individuals for trait models)
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Burn-in sweeps
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Sweeps between recorded samples
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent Markov chains
    #[arg(long)]
    pub chains: Option<usize>,
    /// Trait preset: ukbb | regression
    #[arg(long)]
    pub preset: Option<String>,
    /// Output file; `.csv` writes CSV, anything else the packed format
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct EstimateArgs {
    /// Dataset (`.csv` or packed)
    #[arg(short = 'i', long)]
    pub input: Option<PathBuf>,
    /// nn-pairs | non-nn-pairs | all-pairs | all | plaquettes | plaquette-triples | sites | explicit list "a-b,c-d"
    #[arg(long)]
    pub targets: Option<String>,
    /// Tuple order for `--targets all`
    #[arg(long)]
    pub order: Option<usize>,
    /// full | parents | list | none
    #[arg(long)]
    pub condition: Option<String>,
    /// JSON with {"neighbours": {var: [vars]}} or {"tuples": [{"targets": [...], "conditioning": [...]}]}
    #[arg(long)]
    pub parents_file: Option<PathBuf>,
    /// Conditioning variables for `--condition list`, comma separated
    #[arg(long)]
    pub cond_vars: Option<String>,
    /// Lattice model used for default parent sets: ising | plaquette
    #[arg(long)]
    pub model: Option<String>,
    /// Lattice side, when it cannot be inferred from the data
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub side: Option<usize>,
    /// multiplicative | additive
    #[arg(long)]
    pub kind: Option<String>,
    /// Outcome column for additive estimates
    #[arg(long)]
    pub outcome: Option<String>,
    /// Covariate strata for additive estimates, comma separated
    #[arg(long)]
    pub strata: Option<String>,
    /// Bootstrap replicates (0 disables)
    #[arg(long = "boot-B")]
    #[serde(rename = "boot-B")]
    pub boot_b: Option<usize>,
    /// Cells below this support are flagged
    #[arg(long)]
    pub min_bin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; `.csv` writes a tidy table, anything else JSON
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ScreenArgs {
    #[arg(short = 'i', long)]
    pub input: Option<PathBuf>,
    /// Pair generator or explicit list, as for `estimate`
    #[arg(long)]
    pub targets: Option<String>,
    /// none | parents | list
    #[arg(long)]
    pub condition: Option<String>,
    #[arg(long)]
    pub parents_file: Option<PathBuf>,
    #[arg(long)]
    pub cond_vars: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub side: Option<usize>,
    /// p-values below this are reported dependent
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ReportArgs {
    /// Estimate outputs (JSON)
    #[arg(long, num_args = 1..)]
    pub estimates: Vec<PathBuf>,
    /// Screen outputs (JSON)
    #[arg(long, num_args = 1..)]
    pub screens: Vec<PathBuf>,
    /// Trait datasets for outcome histograms
    #[arg(long, num_args = 1..)]
    pub traits: Vec<PathBuf>,
    /// Histogram bins
    #[arg(long)]
    pub bins: Option<usize>,
    /// Output directory
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => simulate::run(common::merge_config(&a, file)?, argv),
        Command::Estimate(a) => estimate::run_estimate(common::merge_config(&a, file)?, argv),
        Command::Screen(a) => estimate::run_screen(common::merge_config(&a, file)?, argv),
        Command::Report(a) => report::run(common::merge_config(&a, file)?),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
