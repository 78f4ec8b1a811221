use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stereoboot_cli::config::{Columns, GridSpec, OutputFormat, Recenter};
use stereoboot_cli::{run_with_threads, CliError, CliResult, CommandName, RunConfig};
use stereoboot_core::{EstimatorKind, IntervalStyle, RadialModel};

#[derive(Debug, Parser)]
#[command(
    name = "stereoboot",
    version,
    about = "Estimate the 3-D squared radius distribution from projected positions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit estimators to a dataset and write their curves.
    Estimate(RunArgs),
    /// Pointwise bootstrap confidence intervals on a grid.
    Ci(RunArgs),
    /// Draw squared projected radii from a built-in model.
    Simulate(RunArgs),
    /// Monte Carlo sampling distribution against the limit laws.
    Mc(RunArgs),
    /// Monte Carlo coverage of the bootstrap intervals.
    Coverage(RunArgs),
}

fn parse_style(s: &str) -> Result<IntervalStyle, String> {
    match s {
        "root-basic" | "basic" => Ok(IntervalStyle::RootBasic),
        "percentile" => Ok(IntervalStyle::Percentile),
        _ => Err(format!("unknown interval style '{s}' (root-basic, percentile)")),
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration, or a metadata file from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// `y`, `x1,x2`, any other one or two names, or `auto`.
    #[arg(long)]
    columns: Option<Columns>,
    #[arg(long, value_enum)]
    recenter: Option<Recenter>,
    /// Rows that may be rejected before ingestion fails.
    #[arg(long)]
    max_rejected: Option<usize>,
    /// Comma-separated: naive-v, iso-v, naive-f, iso-f, gcm-f.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<EstimatorKind>>,
    #[arg(long)]
    x0: Option<f64>,
    /// `start:end:count` or a comma-separated list.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Bootstrap replicates.
    #[arg(long = "B", alias = "replicates")]
    replicates: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// root-basic or percentile.
    #[arg(long, value_parser = parse_style)]
    style: Option<IntervalStyle>,
    /// Interior points per data gap for the gcm-f grid.
    #[arg(long)]
    refinement: Option<usize>,
    /// Clamp F estimates into [0, 1].
    #[arg(long)]
    clamp: bool,
    /// `ball[:R]` or `gaussian[:sigma]`.
    #[arg(long)]
    model: Option<RadialModel>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl RunArgs {
    fn into_config(self, command: CommandName) -> CliResult<(RunConfig, PathBuf, Option<usize>)> {
        let mut c = match &self.config {
            Some(path) => {
                let mut c = RunConfig::from_json_file(path)?;
                c.command = command;
                c
            }
            None => RunConfig::new(command),
        };
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { c.$field = v; })* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $(if self.$field.is_some() { c.$field = self.$field; })* };
        }
        set!(columns, recenter, max_rejected, kinds, replicates, alpha, seed, style, format);
        set_opt!(input, x0, grid, refinement, model, n, reps);
        if self.clamp {
            c.clamp = true;
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        Ok((c, self.out, self.threads))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Command::Estimate(a) => (CommandName::Estimate, a),
        Command::Ci(a) => (CommandName::Ci, a),
        Command::Simulate(a) => (CommandName::Simulate, a),
        Command::Mc(a) => (CommandName::Mc, a),
        Command::Coverage(a) => (CommandName::Coverage, a),
    };
    let result = args.into_config(command).and_then(|(config, out, threads)| run_with_threads(&config, &out, threads));
    match result {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stereoboot: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
